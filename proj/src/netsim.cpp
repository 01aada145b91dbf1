#include "v2v/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "v2v/common.hpp"
#include "v2v/geometry.hpp"

namespace v2v {

namespace {
std::uint64_t pair_key(std::uint64_t a, std::uint64_t b) {
    return (std::min(a, b) << 32) | std::max(a, b);
}
}  // namespace

const char* to_string(ChannelModel m) {
    return m == ChannelModel::LOS_OLOS ? "LOS_OLOS" : "NAKAGAMI";
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::RECEIVED: return "RECEIVED";
        case Outcome::CHANNEL_LOSS: return "CHANNEL_LOSS";
        case Outcome::COLLISION: return "COLLISION";
        case Outcome::BUSY_DROP: return "BUSY_DROP";
    }
    return "?";
}

void RadioConfig::validate() const {
    if (bitrate_bps <= 0.0 || payload_bytes <= 0.0 || overhead_bytes < 0.0 ||
        beacon_rate_hz <= 0.0 || carrier_freq_hz <= 0.0 || bandwidth_hz <= 0.0 ||
        slot_s <= 0.0 || aifs_s <= 0.0 || cw_slots < 1)
        throw config_error("RadioConfig: physical parameters must be positive");
    if (cca_threshold_dbm <= noise_floor_dbm())
        throw config_error("RadioConfig: CCA threshold must exceed the noise floor");
}

void ChannelParams::validate() const {
    los.validate();
    olos.validate();
    nlos.validate();
    nakagami.validate();
    if (dc_los_m <= 0.0 || dc_olos_m <= 0.0 || dc_nlos_m <= 0.0)
        throw config_error("ChannelParams: decorrelation distances must be positive");
}

// ---------------------------------------------------------------- ChannelStack

ChannelStack::ChannelStack(ChannelParams params, RadioConfig radio, ChannelModel model,
                           std::uint64_t seed)
    : params_(std::move(params)), radio_(radio), model_(model), seed_(seed) {
    params_.validate();
}

ShadowConfig ChannelStack::shadow_config(LinkClass cls) const {
    switch (cls) {
        case LinkClass::LOS: return {params_.los.sigma_db, params_.dc_los_m, params_.shadow_mode};
        case LinkClass::OLOS:
            return {params_.olos.sigma_db, params_.dc_olos_m, params_.shadow_mode};
        default: return {params_.nlos.sigma_db, params_.dc_nlos_m, params_.shadow_mode};
    }
}

double ChannelStack::mean_gain_db(LinkClass cls, double d_m,
                                  const std::optional<NlosGeometry>& geom) const {
    switch (cls) {
        case LinkClass::LOS: return dual_slope_gain_db(params_.los, std::max(d_m, params_.los.d0_m));
        case LinkClass::OLOS:
            return dual_slope_gain_db(params_.olos, std::max(d_m, params_.olos.d0_m));
        case LinkClass::NLOS:
            if (!geom)
                throw config_error("ChannelStack: NLOS link without intersection geometry");
            return -nlos_gain_db(params_.nlos, *geom);
        case LinkClass::NLOS_PARALLEL: return -parallel_street_loss();
    }
    throw config_error("ChannelStack: unknown link class");
}

ChannelStack::LinkState& ChannelStack::link_state(std::uint64_t a, std::uint64_t b, LinkClass cls,
                                                  double d_m) {
    const std::uint64_t key = pair_key(a, b);
    auto it = links_.find(key);
    if (it == links_.end()) {
        it = links_
                 .emplace(key, LinkState{ShadowProcess(shadow_config(cls), seed_, std::min(a, b),
                                                       std::max(a, b)),
                                         cls, d_m, 0.0})
                 .first;
    }
    LinkState& st = it->second;
    if (st.cls != cls) {
        // sigma/dc switch on class change; normalized state is retained
        st.shadow.set_config(shadow_config(cls));
        st.cls = cls;
    }
    return st;
}

double ChannelStack::received_power_dbm(std::uint64_t tx, std::uint64_t rx, LinkClass cls,
                                        double d_m, const std::optional<NlosGeometry>& geom,
                                        std::uint64_t frame_seq) {
    if (cls == LinkClass::NLOS_PARALLEL) return -std::numeric_limits<double>::infinity();

    if (model_ == ChannelModel::NAKAGAMI) {
        auto rng = make_engine(seed_, frame_seq, rx, 0x4BADF00DULL);
        const double d_eff = std::max(d_m, params_.nakagami.mean_gain.d0_m);
        const double gain = nakagami_sample(params_.nakagami, d_eff, rng);
        return radio_.tx_power_dbm + linear_to_db(gain);
    }

    const double mean = mean_gain_db(cls, d_m, geom);
    LinkState& st = link_state(tx, rx, cls, d_m);
    const double delta = std::abs(d_m - st.last_distance_m);
    st.last_distance_m = d_m;
    st.travelled_m += delta;
    const double shadow = params_.shadow_mode == ShadowMode::AR
                              ? st.shadow.advance(delta)
                              : st.shadow.block_value(st.travelled_m);
    return radio_.tx_power_dbm + mean + shadow;
}

// --------------------------------------------------------------------- NetSim

bool NetSim::EventCmp::operator()(const Event& a, const Event& b) const {
    // min-heap: true when a fires after b
    return std::tie(a.t, a.type, a.node, a.order) > std::tie(b.t, b.type, b.node, b.order);
}

NetSim::NetSim(ScenarioConfig scenario, RadioConfig radio, ChannelParams channel,
               ChannelModel model, std::uint64_t seed, SimOptions options)
    : scenario_(std::move(scenario)),
      radio_(radio),
      model_(model),
      options_(options),
      seed_(seed),
      highway_(scenario_, seed),
      channel_(std::move(channel), radio, model, hash_combine(seed, 0xC4A2ULL)),
      mac_rng_(make_engine(seed, 0x3ACULL)) {
    radio_.validate();
}

void NetSim::schedule(double t, EvType type, std::uint64_t node, std::uint64_t gen,
                      std::uint64_t aux) {
    heap_.push_back({t, type, node, gen, aux, event_order_++});
    std::push_heap(heap_.begin(), heap_.end(), EventCmp{});
}

double NetSim::sensed_power_w(std::uint64_t id) const {
    double sum = 0.0;
    for (const Frame& f : active_frames_) {
        if (f.tx == id) continue;
        for (std::size_t i = 0; i < f.rx_ids.size(); ++i)
            if (f.rx_ids[i] == id) {
                sum += f.prx_w[i];
                break;
            }
    }
    return sum;
}

bool NetSim::medium_busy(std::uint64_t id) const {
    return sensed_power_w(id) >= dbm_to_watts(radio_.cca_threshold_dbm);
}

std::optional<std::pair<LinkClass, double>> NetSim::classify_cached(const VehicleBody& a,
                                                                   const VehicleBody& b) {
    const Vec2 pa = a.antenna(), pb = b.antenna();
    const double d = norm(pb - pa);
    const double horizon = std::max(options_.max_link_distance_m, options_.interference_range_m);
    if (d > horizon || d == 0.0) return std::nullopt;
    const std::uint64_t key = pair_key(a.id, b.id);
    if (auto it = class_cache_.find(key); it != class_cache_.end()) return it->second;

    LinkClass cls = LinkClass::LOS;
    const double x_lo = std::min(pa.x, pb.x) - scenario_.vehicle_length_m;
    const double x_hi = std::max(pa.x, pb.x) + scenario_.vehicle_length_m;
    for (const auto& v : highway_.vehicles()) {
        if (v.id == a.id || v.id == b.id) continue;
        if (v.position_m < x_lo || v.position_m > x_hi) continue;
        if (segment_intersects_rect(
                pa, pb, v.footprint(scenario_.vehicle_length_m, scenario_.vehicle_width_m))) {
            cls = LinkClass::OLOS;
            break;
        }
    }
    auto res = std::make_pair(cls, d);
    class_cache_.emplace(key, res);
    return res;
}

void NetSim::on_step() {
    highway_.advance(scenario_.step_s);
    ++step_index_;
    class_cache_.clear();

    // node lifecycle follows the vehicle set
    std::map<std::uint64_t, const VehicleBody*> present;
    for (const auto& v : highway_.vehicles()) present[v.id] = &v;

    for (auto it = nodes_.begin(); it != nodes_.end();) {
        if (!present.count(it->first))
            it = nodes_.erase(it);
        else
            ++it;
    }
    std::uniform_real_distribution<double> phase(0.0, 1.0 / radio_.beacon_rate_hz);
    for (const auto& [id, veh] : present) {
        if (nodes_.count(id)) continue;
        nodes_.emplace(id, Node{id});
        schedule(now_ + phase(mac_rng_), EvType::BEACON, id);
    }

    if (tracked_.empty() && now_ >= options_.warmup_s) select_tracked_pairs();

    if (class_sink_ && now_ >= options_.warmup_s) {
        const auto& vs = highway_.vehicles();
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j)
                if (auto c = classify_cached(vs[i], vs[j]))
                    if (c->second <= options_.max_link_distance_m)
                        class_sink_(c->second, c->first);
    }

    const double next = now_ + scenario_.step_s;
    if (next < scenario_.sim_duration_s) schedule(next, EvType::STEP, 0);
}

void NetSim::select_tracked_pairs() {
    const std::size_t per_dir = std::max<std::size_t>(options_.tracked_pairs / 2, 1);
    for (int direction : {+1, -1}) {
        struct Cand {
            double sep;
            std::uint64_t a, b;
        };
        std::vector<Cand> cands;
        const auto& vs = highway_.vehicles();
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j) {
                if (vs[i].direction != direction || vs[j].direction != direction) continue;
                if (vs[i].lane == vs[j].lane) continue;  // pairs ride different lanes
                const double sep = std::abs(vs[i].position_m - vs[j].position_m);
                if (sep > options_.max_link_distance_m) continue;
                cands.push_back({sep, vs[i].id, vs[j].id});
            }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            return std::tie(a.sep, a.a, a.b) < std::tie(b.sep, b.a, b.b);
        });
        std::vector<std::uint64_t> used;
        for (const Cand& c : cands) {
            if (tracked_.size() >= options_.tracked_pairs) break;
            if (std::count(used.begin(), used.end(), c.a) ||
                std::count(used.begin(), used.end(), c.b))
                continue;
            tracked_.push_back({c.a, c.b, direction});
            used.push_back(c.a);
            used.push_back(c.b);
            if (used.size() >= 2 * per_dir) break;
        }
    }
}

void NetSim::on_beacon(std::uint64_t id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) return;
    Node& n = it->second;
    n.has_packet = true;  // a fresh beacon replaces any stale one
    schedule(now_ + 1.0 / radio_.beacon_rate_hz, EvType::BEACON, id);
    if (n.state == MacState::IDLE) begin_access(id, now_);
}

void NetSim::begin_access(std::uint64_t id, double t) {
    Node& n = nodes_.at(id);
    if (medium_busy(id)) {
        n.state = MacState::BACKOFF;
        std::uniform_int_distribution<int> bo(0, radio_.cw_slots);
        n.backoff_slots = bo(mac_rng_);
        n.slot_armed = false;  // armed on the next medium-idle transition
    } else {
        n.state = MacState::WAIT_AIFS;
        ++n.gen;
        schedule(t + radio_.aifs_s, EvType::ACCESS, id, n.gen);
    }
}

void NetSim::on_access(std::uint64_t id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || it->second.state != MacState::WAIT_AIFS) return;
    Node& n = it->second;
    if (medium_busy(id)) {
        n.state = MacState::BACKOFF;
        std::uniform_int_distribution<int> bo(0, radio_.cw_slots);
        n.backoff_slots = bo(mac_rng_);
        n.slot_armed = false;
    } else {
        start_tx(id, now_);
    }
}

void NetSim::on_slot(std::uint64_t id) {
    auto it = nodes_.find(id);
    if (it == nodes_.end() || it->second.state != MacState::BACKOFF) return;
    Node& n = it->second;
    if (medium_busy(id)) {
        n.slot_armed = false;  // freeze; resumes on the next idle transition
        return;
    }
    if (n.backoff_slots-- == 0) {
        start_tx(id, now_);
    } else {
        ++n.gen;
        schedule(now_ + radio_.slot_s, EvType::SLOT, id, n.gen);
    }
}

void NetSim::notify_medium_change(double t) {
    for (auto& [id, n] : nodes_) {
        if (n.state != MacState::BACKOFF || n.slot_armed) continue;
        if (medium_busy(id)) continue;
        n.slot_armed = true;
        ++n.gen;
        schedule(t + radio_.aifs_s + radio_.slot_s, EvType::SLOT, id, n.gen);
    }
}

void NetSim::start_tx(std::uint64_t id, double t) {
    Node& n = nodes_.at(id);
    n.state = MacState::TX;
    n.has_packet = false;

    Frame f;
    f.seq = frame_seq_++;
    f.tx = id;
    f.start = t;
    f.end = t + radio_.frame_duration_s();

    const VehicleBody* tx_v = nullptr;
    for (const auto& v : highway_.vehicles())
        if (v.id == id) {
            tx_v = &v;
            break;
        }
    if (tx_v) {
        for (const auto& v : highway_.vehicles()) {
            if (v.id == id) continue;
            auto c = classify_cached(*tx_v, v);
            if (!c) continue;
            const double prx_dbm =
                channel_.received_power_dbm(id, v.id, c->first, c->second, std::nullopt, f.seq);
            f.rx_ids.push_back(v.id);
            f.prx_w.push_back(std::isinf(prx_dbm) ? 0.0 : dbm_to_watts(prx_dbm));
            f.distance_m.push_back(c->second);
            f.cls.push_back(c->first);
        }
    }
    active_frames_.push_back(std::move(f));
    schedule(active_frames_.back().end, EvType::TX_END, id, 0, active_frames_.back().seq);
}

void NetSim::on_tx_end(std::uint64_t frame_seq) {
    auto it = std::find_if(active_frames_.begin(), active_frames_.end(),
                           [&](const Frame& f) { return f.seq == frame_seq; });
    if (it == active_frames_.end()) return;
    Frame f = std::move(*it);
    active_frames_.erase(it);

    if (auto nit = nodes_.find(f.tx); nit != nodes_.end()) {
        nit->second.state = MacState::IDLE;
        if (nit->second.has_packet) begin_access(f.tx, now_);
    }

    finished_frames_.push_back(f);
    evaluate_frame(finished_frames_.back());
    const double horizon = now_ - 2.0 * radio_.frame_duration_s();
    while (!finished_frames_.empty() && finished_frames_.front().end < horizon)
        finished_frames_.pop_front();

    notify_medium_change(now_);
}

void NetSim::evaluate_frame(const Frame& f) {
    if (!record_sink_ || f.start < options_.warmup_s) return;

    // frames that can overlap f: everything still active plus the
    // recently finished ones
    std::vector<const Frame*> overlap;
    for (const Frame& g : active_frames_)
        if (g.start < f.end && g.end > f.start) overlap.push_back(&g);
    for (const Frame& g : finished_frames_)
        if (g.seq != f.seq && g.start < f.end && g.end > f.start) overlap.push_back(&g);

    const double noise_w = dbm_to_watts(radio_.noise_floor_dbm());
    const double sens_w = dbm_to_watts(radio_.sensitivity_dbm);
    const double sinr_thr = db_to_linear(radio_.sinr_threshold_db);

    auto prx_at = [](const Frame& g, std::uint64_t rx) -> double {
        for (std::size_t i = 0; i < g.rx_ids.size(); ++i)
            if (g.rx_ids[i] == rx) return g.prx_w[i];
        return 0.0;
    };

    for (std::size_t i = 0; i < f.rx_ids.size(); ++i) {
        if (f.distance_m[i] > options_.max_link_distance_m) continue;  // energy-only entry
        const std::uint64_t rx = f.rx_ids[i];
        PacketRecord rec;
        rec.timestamp_s = f.start;
        rec.tx = f.tx;
        rec.rx = rx;
        rec.distance_m = f.distance_m[i];
        rec.link_class = f.cls[i];
        rec.prx_dbm = f.prx_w[i] > 0.0 ? watts_to_dbm(f.prx_w[i])
                                       : -std::numeric_limits<double>::infinity();

        bool rx_was_transmitting = false;
        for (const Frame* g : overlap)
            if (g->tx == rx) rx_was_transmitting = true;

        if (rx_was_transmitting) {
            rec.outcome = Outcome::BUSY_DROP;
        } else if (f.prx_w[i] < sens_w) {
            rec.outcome = Outcome::CHANNEL_LOSS;
        } else {
            // Capture-by-SINR: the whole frame must clear the threshold at
            // the worst concurrent-interference instant. At most one of any
            // overlapping pair can pass, so the stronger frame captures the
            // receiver regardless of arrival order.
            struct Edge {
                double t;
                double dp;
            };
            std::vector<Edge> edges;
            for (const Frame* g : overlap) {
                if (g->tx == rx) continue;
                const double p = prx_at(*g, rx);
                if (p <= 0.0) continue;
                edges.push_back({std::max(g->start, f.start), p});
                edges.push_back({std::min(g->end, f.end), -p});
            }
            std::sort(edges.begin(), edges.end(),
                      [](const Edge& a, const Edge& b) { return a.t < b.t; });
            double cur = 0.0, worst = 0.0;
            for (const Edge& e : edges) {
                cur += e.dp;
                worst = std::max(worst, cur);
            }
            const double sinr = f.prx_w[i] / (noise_w + worst);
            if (sinr >= sinr_thr)
                rec.outcome = Outcome::RECEIVED;
            else
                rec.outcome = worst > 0.0 ? Outcome::COLLISION : Outcome::CHANNEL_LOSS;
        }
        record_sink_(rec);
    }
}

void NetSim::run() {
    if (options_.prepopulate) highway_.prepopulate();

    std::uniform_real_distribution<double> phase(0.0, 1.0 / radio_.beacon_rate_hz);
    for (const auto& v : highway_.vehicles()) {
        nodes_.emplace(v.id, Node{v.id});
        schedule(phase(mac_rng_), EvType::BEACON, v.id);
    }
    schedule(scenario_.step_s, EvType::STEP, 0);

    while (!heap_.empty()) {
        std::pop_heap(heap_.begin(), heap_.end(), EventCmp{});
        Event e = heap_.back();
        heap_.pop_back();
        if (e.t > scenario_.sim_duration_s) break;
        now_ = e.t;
        switch (e.type) {
            case EvType::STEP: on_step(); break;
            case EvType::TX_END: on_tx_end(e.aux); break;
            case EvType::ACCESS:
                if (auto it = nodes_.find(e.node); it != nodes_.end() && it->second.gen == e.gen)
                    on_access(e.node);
                break;
            case EvType::SLOT:
                if (auto it = nodes_.find(e.node); it != nodes_.end() && it->second.gen == e.gen)
                    on_slot(e.node);
                break;
            case EvType::BEACON: on_beacon(e.node); break;
        }
    }
}

}  // namespace v2v
