#include "v2v/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <random>
#include <sstream>

#include "v2v/common.hpp"
#include "v2v/pathloss.hpp"

namespace v2v {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (v[n / 2 - 1] + hi);
}

LinkClass link_class_from_string(const std::string& s) {
    if (s == "LOS") return LinkClass::LOS;
    if (s == "OLOS") return LinkClass::OLOS;
    if (s == "NLOS") return LinkClass::NLOS;
    if (s == "NLOS_PARALLEL") return LinkClass::NLOS_PARALLEL;
    throw config_error("unknown link class: " + s);
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "RECEIVED") return Outcome::RECEIVED;
    if (s == "CHANNEL_LOSS") return Outcome::CHANNEL_LOSS;
    if (s == "COLLISION") return Outcome::COLLISION;
    if (s == "BUSY_DROP") return Outcome::BUSY_DROP;
    throw config_error("unknown outcome: " + s);
}

constexpr double kNegInfDbm = -999.0;

}  // namespace

MetricsAccumulator::MetricsAccumulator(double bin_width_m, std::uint64_t bootstrap_seed)
    : bin_width_m_(bin_width_m), bootstrap_seed_(bootstrap_seed) {
    if (bin_width_m <= 0.0) throw config_error("MetricsAccumulator: bin width must be positive");
}

void MetricsAccumulator::set_tracked(const std::vector<TrackedPair>& pairs) {
    tracked_ = pairs;
    track_all_pairs_ = false;
}

void MetricsAccumulator::add_record(const PacketRecord& rec) {
    const auto bin = static_cast<std::uint64_t>(rec.distance_m / bin_width_m_);
    BinAccum& acc = bins_[bin];
    acc.records++;
    if (rec.outcome == Outcome::RECEIVED) acc.received++;
    if (std::isfinite(rec.prx_dbm)) {
        if (rec.link_class == LinkClass::LOS) acc.prx_los_dbm.push_back(rec.prx_dbm);
        if (rec.link_class == LinkClass::OLOS) acc.prx_olos_dbm.push_back(rec.prx_dbm);
    }

    if (rec.outcome != Outcome::RECEIVED) return;
    bool tracked = track_all_pairs_;
    for (const auto& p : tracked_)
        if ((p.a == rec.tx && p.b == rec.rx) || (p.a == rec.rx && p.b == rec.tx)) {
            tracked = true;
            break;
        }
    if (!tracked) return;
    const auto key = std::make_pair(rec.tx, rec.rx);  // ordered: per TX at this RX
    auto it = last_success_.find(key);
    if (it != last_success_.end()) iat_by_bin_[bin].push_back(rec.timestamp_s - it->second);
    last_success_[key] = rec.timestamp_s;
}

void MetricsAccumulator::add_class_sample(double distance_m, LinkClass cls) {
    const auto bin = static_cast<std::uint64_t>(distance_m / bin_width_m_);
    BinAccum& acc = bins_[bin];
    switch (cls) {
        case LinkClass::LOS: acc.c_los++; break;
        case LinkClass::OLOS: acc.c_olos++; break;
        default: acc.c_nlos++; break;
    }
}

MetricsBundle MetricsAccumulator::finalize() const {
    MetricsBundle out;
    for (const auto& [bin, acc] : bins_) {
        const double lo = static_cast<double>(bin) * bin_width_m_;
        const double hi = lo + bin_width_m_;

        if (acc.records > 0) {
            PrpBin p;
            p.lo_m = lo;
            p.hi_m = hi;
            p.records = acc.records;
            p.received = acc.received;
            p.prp = static_cast<double>(acc.received) / static_cast<double>(acc.records);
            // parametric bootstrap on the per-bin Bernoulli counts
            auto rng = make_engine(bootstrap_seed_, bin, 0xb007ULL);
            std::binomial_distribution<std::uint64_t> binom(acc.records, p.prp);
            std::vector<double> reps(200);
            for (double& r : reps)
                r = static_cast<double>(binom(rng)) / static_cast<double>(acc.records);
            std::sort(reps.begin(), reps.end());
            p.ci_lo = reps[4];    // 2.5th percentile of 200
            p.ci_hi = reps[194];  // 97.5th
            out.prp.push_back(p);
        }

        const std::uint64_t n_cls = acc.c_los + acc.c_olos + acc.c_nlos;
        double p_los = 0.0, p_olos = 0.0;
        if (n_cls > 0) {
            ClassProbBin c;
            c.lo_m = lo;
            c.hi_m = hi;
            c.samples = n_cls;
            c.p_los = static_cast<double>(acc.c_los) / static_cast<double>(n_cls);
            c.p_olos = static_cast<double>(acc.c_olos) / static_cast<double>(n_cls);
            c.p_nlos = static_cast<double>(acc.c_nlos) / static_cast<double>(n_cls);
            p_los = c.p_los;
            p_olos = c.p_olos;
            out.class_prob.push_back(c);
        }

        if (!acc.prx_los_dbm.empty() || !acc.prx_olos_dbm.empty()) {
            PowerBin pw;
            pw.lo_m = lo;
            pw.hi_m = hi;
            pw.n_los = acc.prx_los_dbm.size();
            pw.n_olos = acc.prx_olos_dbm.size();
            double mean_los_w = 0.0, mean_olos_w = 0.0;
            for (double x : acc.prx_los_dbm) mean_los_w += dbm_to_watts(x);
            for (double x : acc.prx_olos_dbm) mean_olos_w += dbm_to_watts(x);
            if (pw.n_los > 0) {
                mean_los_w /= static_cast<double>(pw.n_los);
                pw.mean_los_dbm = watts_to_dbm(mean_los_w);
                pw.median_los_dbm = median_of(acc.prx_los_dbm);
            }
            if (pw.n_olos > 0) {
                mean_olos_w /= static_cast<double>(pw.n_olos);
                pw.mean_olos_dbm = watts_to_dbm(mean_olos_w);
                pw.median_olos_dbm = median_of(acc.prx_olos_dbm);
            }
            if (n_cls > 0) {
                const double mixed_w =
                    mix_received_power(p_los, p_olos, mean_los_w, mean_olos_w);
                pw.mixed_dbm = mixed_w > 0.0 ? watts_to_dbm(mixed_w) : kNegInfDbm;
            }
            out.power.push_back(pw);
        }
    }
    for (const auto& [bin, iats] : iat_by_bin_) {
        IatBin b;
        b.lo_m = static_cast<double>(bin) * bin_width_m_;
        b.hi_m = b.lo_m + bin_width_m_;
        b.iat_s = iats;
        std::sort(b.iat_s.begin(), b.iat_s.end());
        out.iat.push_back(b);
    }
    return out;
}

std::vector<PrpBin> compute_prp(const std::vector<PacketRecord>& records, double bin_m,
                                std::uint64_t bootstrap_seed) {
    MetricsAccumulator acc(bin_m, bootstrap_seed);
    for (const auto& r : records) acc.add_record(r);
    return acc.finalize().prp;
}

std::vector<ClassProbBin> compute_los_probability(
    const std::vector<std::pair<double, LinkClass>>& log, double bin_m) {
    if (log.empty()) throw config_error("compute_los_probability: empty classification log");
    MetricsAccumulator acc(bin_m);
    for (const auto& [d, c] : log) acc.add_class_sample(d, c);
    return acc.finalize().class_prob;
}

std::vector<IatBin> compute_iat_cdf(const std::vector<PacketRecord>& records, double bin_m) {
    MetricsAccumulator acc(bin_m);
    for (const auto& r : records) acc.add_record(r);
    return acc.finalize().iat;
}

namespace {
std::ostream& fixed6(std::ostream& os) { return os << std::fixed << std::setprecision(6); }
}  // namespace

void write_prp_csv(std::ostream& os, const std::vector<PrpBin>& bins) {
    os << "bin_lo_m,bin_hi_m,records,received,prp,ci_lo,ci_hi\n";
    for (const auto& b : bins)
        fixed6(os) << b.lo_m << ',' << b.hi_m << ',' << b.records << ',' << b.received << ','
                   << b.prp << ',' << b.ci_lo << ',' << b.ci_hi << '\n';
}

void write_class_prob_csv(std::ostream& os, const std::vector<ClassProbBin>& bins) {
    os << "bin_lo_m,bin_hi_m,samples,p_los,p_olos,p_nlos\n";
    for (const auto& b : bins)
        fixed6(os) << b.lo_m << ',' << b.hi_m << ',' << b.samples << ',' << b.p_los << ','
                   << b.p_olos << ',' << b.p_nlos << '\n';
}

void write_power_csv(std::ostream& os, const std::vector<PowerBin>& bins) {
    os << "bin_lo_m,bin_hi_m,n_los,n_olos,mean_los_dbm,median_los_dbm,mean_olos_dbm,"
          "median_olos_dbm,mixed_dbm\n";
    for (const auto& b : bins)
        fixed6(os) << b.lo_m << ',' << b.hi_m << ',' << b.n_los << ',' << b.n_olos << ','
                   << b.mean_los_dbm << ',' << b.median_los_dbm << ',' << b.mean_olos_dbm << ','
                   << b.median_olos_dbm << ',' << b.mixed_dbm << '\n';
}

void write_iat_csv(std::ostream& os, const std::vector<IatBin>& bins) {
    os << "bin_lo_m,bin_hi_m,iat_s,cdf\n";
    for (const auto& b : bins) {
        const double n = static_cast<double>(b.iat_s.size());
        for (std::size_t i = 0; i < b.iat_s.size(); ++i)
            fixed6(os) << b.lo_m << ',' << b.hi_m << ',' << b.iat_s[i] << ','
                       << static_cast<double>(i + 1) / n << '\n';
    }
}

void write_record_csv_header(std::ostream& os) {
    os << "timestamp_s,tx,rx,distance_m,class,prx_dbm,outcome\n";
}

void write_record_csv_row(std::ostream& os, const PacketRecord& rec) {
    const double prx = std::isfinite(rec.prx_dbm) ? rec.prx_dbm : kNegInfDbm;
    fixed6(os) << rec.timestamp_s << ',' << rec.tx << ',' << rec.rx << ',' << rec.distance_m
               << ',' << to_string(rec.link_class) << ',' << prx << ','
               << to_string(rec.outcome) << '\n';
}

std::vector<PacketRecord> read_record_csv(std::istream& is) {
    std::vector<PacketRecord> out;
    std::string line;
    if (!std::getline(is, line)) throw config_error("read_record_csv: empty input");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        PacketRecord r;
        std::getline(ss, field, ',');
        r.timestamp_s = std::stod(field);
        std::getline(ss, field, ',');
        r.tx = std::stoull(field);
        std::getline(ss, field, ',');
        r.rx = std::stoull(field);
        std::getline(ss, field, ',');
        r.distance_m = std::stod(field);
        std::getline(ss, field, ',');
        r.link_class = link_class_from_string(field);
        std::getline(ss, field, ',');
        r.prx_dbm = std::stod(field);
        std::getline(ss, field, ',');
        r.outcome = outcome_from_string(field);
        out.push_back(r);
    }
    return out;
}

}  // namespace v2v
