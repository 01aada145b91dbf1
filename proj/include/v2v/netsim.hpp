#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "v2v/mobility.hpp"
#include "v2v/nakagami.hpp"
#include "v2v/pathloss.hpp"
#include "v2v/shadowing.hpp"

namespace v2v {

enum class ChannelModel { LOS_OLOS, NAKAGAMI };

enum class Outcome { RECEIVED, CHANNEL_LOSS, COLLISION, BUSY_DROP };

const char* to_string(ChannelModel m);
const char* to_string(Outcome o);

struct RadioConfig {
    double tx_power_dbm = 20.0;
    double bitrate_bps = 6e6;
    double payload_bytes = 400.0;
    double overhead_bytes = 78.0;  // MAC+PHY overhead, fixed
    double beacon_rate_hz = 10.0;
    double carrier_freq_hz = 5.6e9;
    double bandwidth_hz = 10e6;
    double noise_figure_db = 6.0;
    double cca_threshold_dbm = -94.0;  // preamble-detection carrier sense
    double sinr_threshold_db = 8.0;
    double sensitivity_dbm = -94.0;
    double slot_s = 13e-6;
    double aifs_s = 58e-6;
    int cw_slots = 15;

    void validate() const;
    double frame_duration_s() const {
        return (payload_bytes + overhead_bytes) * 8.0 / bitrate_bps;
    }
    double noise_floor_dbm() const {
        return -174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
    }
    double lambda_m() const { return 299792458.0 / carrier_freq_hz; }
};

struct PacketRecord {
    double timestamp_s = 0.0;  // transmission start
    std::uint64_t tx = 0;
    std::uint64_t rx = 0;
    double distance_m = 0.0;  // TX-RX distance at transmission
    LinkClass link_class = LinkClass::LOS;
    double prx_dbm = 0.0;
    Outcome outcome = Outcome::RECEIVED;
};

// Everything the channel stack needs: per-class mean models plus the
// shadow-fading configuration.
struct ChannelParams {
    PathLossParams los = params::highway_los();
    PathLossParams olos = params::highway_olos();
    NlosParams nlos;
    NakagamiParams nakagami = placeholder_nakagami();
    double dc_los_m = 23.3;
    double dc_olos_m = 32.5;
    double dc_nlos_m = 4.5;  // no fitted value; urban-OLOS default
    ShadowMode shadow_mode = ShadowMode::AR;

    void validate() const;
};

// Per-link received-power computation: deterministic dual-slope mean plus
// correlated shadowing (LOS/OLOS model) or a Gamma power draw (Nakagami
// comparison model). Owns the per-link shadow processes; deterministic
// for a given (seed, call order).
class ChannelStack {
public:
    ChannelStack(ChannelParams params, RadioConfig radio, ChannelModel model, std::uint64_t seed);

    // Mean channel gain in dB, no shadowing. Distances below d0 clamp to
    // d0. NLOS needs geometry; NLOS_PARALLEL is -inf (ignored link).
    double mean_gain_db(LinkClass cls, double d_m,
                        const std::optional<NlosGeometry>& geom = std::nullopt) const;

    // Received power including the stochastic part. Advances the link's
    // shadow state to distance d (LOS/OLOS) or draws per-frame fading
    // (Nakagami, keyed by frame_seq and rx for determinism).
    double received_power_dbm(std::uint64_t tx, std::uint64_t rx, LinkClass cls, double d_m,
                              const std::optional<NlosGeometry>& geom, std::uint64_t frame_seq);

    ChannelModel model() const { return model_; }
    const ChannelParams& params() const { return params_; }

private:
    struct LinkState {
        ShadowProcess shadow;
        LinkClass cls;
        double last_distance_m;
        double travelled_m;  // cumulative displacement, for BLOCK mode
    };
    ShadowConfig shadow_config(LinkClass cls) const;
    LinkState& link_state(std::uint64_t a, std::uint64_t b, LinkClass cls, double d_m);

    ChannelParams params_;
    RadioConfig radio_;
    ChannelModel model_;
    std::uint64_t seed_;
    std::unordered_map<std::uint64_t, LinkState> links_;
};

struct SimOptions {
    double max_link_distance_m = 1000.0;   // pairs beyond this produce no records
    double interference_range_m = 2500.0;  // carrier sense / SINR energy horizon
    double warmup_s = 10.0;               // metrics and pair tracking start here
    std::size_t tracked_pairs = 6;        // three per direction
    bool prepopulate = true;
};

struct TrackedPair {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    int direction = 1;
};

// Discrete-event CSMA broadcast simulation over the highway scenario.
class NetSim {
public:
    using RecordSink = std::function<void(const PacketRecord&)>;
    // per pair and mobility step: (distance, class) for the class-probability curves
    using ClassSink = std::function<void(double distance_m, LinkClass cls)>;

    NetSim(ScenarioConfig scenario, RadioConfig radio, ChannelParams channel, ChannelModel model,
           std::uint64_t seed, SimOptions options = {});

    void set_record_sink(RecordSink sink) { record_sink_ = std::move(sink); }
    void set_class_sink(ClassSink sink) { class_sink_ = std::move(sink); }

    void run();

    const std::vector<TrackedPair>& tracked_pairs() const { return tracked_; }
    const RadioConfig& radio() const { return radio_; }

private:
    enum class EvType { STEP = 0, TX_END = 1, ACCESS = 2, SLOT = 3, BEACON = 4 };
    struct Event {
        double t;
        EvType type;
        std::uint64_t node;
        std::uint64_t gen;   // cancellation generation for ACCESS/SLOT
        std::uint64_t aux;   // frame seq for TX_END
        std::uint64_t order; // global tie-break
    };
    struct EventCmp {
        bool operator()(const Event& a, const Event& b) const;
    };
    enum class MacState { IDLE, WAIT_AIFS, BACKOFF, TX };
    struct Node {
        std::uint64_t id;
        MacState state = MacState::IDLE;
        bool has_packet = false;
        int backoff_slots = 0;
        std::uint64_t gen = 0;  // bumps invalidate scheduled ACCESS/SLOT events
        bool slot_armed = false;
    };
    struct Frame {
        std::uint64_t seq;
        std::uint64_t tx;
        double start;
        double end;
        std::vector<std::uint64_t> rx_ids;
        std::vector<double> prx_w;
        std::vector<double> distance_m;
        std::vector<LinkClass> cls;
    };

    void schedule(double t, EvType type, std::uint64_t node, std::uint64_t gen = 0,
                  std::uint64_t aux = 0);
    void on_step();
    void on_beacon(std::uint64_t id);
    void begin_access(std::uint64_t id, double t);
    void on_access(std::uint64_t id);
    void on_slot(std::uint64_t id);
    void start_tx(std::uint64_t id, double t);
    void on_tx_end(std::uint64_t frame_seq);
    void notify_medium_change(double t);
    double sensed_power_w(std::uint64_t id) const;
    bool medium_busy(std::uint64_t id) const;
    void evaluate_frame(const Frame& f);
    void select_tracked_pairs();
    std::optional<std::pair<LinkClass, double>> classify_cached(const VehicleBody& a,
                                                               const VehicleBody& b);

    ScenarioConfig scenario_;
    RadioConfig radio_;
    ChannelModel model_;
    SimOptions options_;
    std::uint64_t seed_;
    Highway highway_;
    ChannelStack channel_;
    std::mt19937_64 mac_rng_;  // MAC decisions only, never channel draws

    std::vector<Event> heap_;
    std::uint64_t event_order_ = 0;
    double now_ = 0.0;
    std::uint64_t step_index_ = 0;
    std::uint64_t frame_seq_ = 0;

    std::map<std::uint64_t, Node> nodes_;  // ordered for deterministic iteration
    std::vector<Frame> active_frames_;
    std::deque<Frame> finished_frames_;  // kept while they can still overlap
    std::unordered_map<std::uint64_t, std::pair<LinkClass, double>> class_cache_;

    std::vector<TrackedPair> tracked_;
    RecordSink record_sink_;
    ClassSink class_sink_;
};

}  // namespace v2v
