#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "v2v/netsim.hpp"

namespace v2v {

struct PrpBin {
    double lo_m = 0.0, hi_m = 0.0;
    std::uint64_t records = 0;
    std::uint64_t received = 0;
    double prp = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // bootstrap 95% band
};

struct ClassProbBin {
    double lo_m = 0.0, hi_m = 0.0;
    std::uint64_t samples = 0;
    double p_los = 0.0, p_olos = 0.0, p_nlos = 0.0;  // sum to 1 per bin
};

struct PowerBin {
    double lo_m = 0.0, hi_m = 0.0;
    std::uint64_t n_los = 0, n_olos = 0;
    double mean_los_dbm = 0.0, median_los_dbm = 0.0;
    double mean_olos_dbm = 0.0, median_olos_dbm = 0.0;
    double mixed_dbm = 0.0;  // probability mixing of the class means
};

struct IatBin {
    double lo_m = 0.0, hi_m = 0.0;
    std::vector<double> iat_s;  // sorted inter-arrival times
};

struct MetricsBundle {
    std::vector<PrpBin> prp;
    std::vector<ClassProbBin> class_prob;
    std::vector<PowerBin> power;
    std::vector<IatBin> iat;
};

// Streaming metrics collection; bins are [k*bin, (k+1)*bin). Empty bins
// are omitted from the outputs, never emitted as 0/0.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(double bin_width_m = 100.0, std::uint64_t bootstrap_seed = 1);

    void set_tracked(const std::vector<TrackedPair>& pairs);
    void add_record(const PacketRecord& rec);
    void add_class_sample(double distance_m, LinkClass cls);

    MetricsBundle finalize() const;

private:
    struct BinAccum {
        std::uint64_t records = 0, received = 0;
        std::uint64_t c_los = 0, c_olos = 0, c_nlos = 0;
        std::vector<double> prx_los_dbm, prx_olos_dbm;
    };
    double bin_width_m_;
    std::uint64_t bootstrap_seed_;
    std::map<std::uint64_t, BinAccum> bins_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> last_success_;  // tracked pairs
    std::map<std::uint64_t, std::vector<double>> iat_by_bin_;
    std::vector<TrackedPair> tracked_;
    bool track_all_pairs_ = true;  // until set_tracked is called
};

// Pure per-operation forms, also used by the metrics CLI verb.
std::vector<PrpBin> compute_prp(const std::vector<PacketRecord>& records, double bin_m,
                                std::uint64_t bootstrap_seed = 1);
std::vector<ClassProbBin> compute_los_probability(
    const std::vector<std::pair<double, LinkClass>>& log, double bin_m);
std::vector<IatBin> compute_iat_cdf(const std::vector<PacketRecord>& records, double bin_m);

// CSV emission; fixed column order and formatting so reruns are
// byte-identical.
void write_prp_csv(std::ostream& os, const std::vector<PrpBin>& bins);
void write_class_prob_csv(std::ostream& os, const std::vector<ClassProbBin>& bins);
void write_power_csv(std::ostream& os, const std::vector<PowerBin>& bins);
void write_iat_csv(std::ostream& os, const std::vector<IatBin>& bins);
void write_record_csv_header(std::ostream& os);
void write_record_csv_row(std::ostream& os, const PacketRecord& rec);
std::vector<PacketRecord> read_record_csv(std::istream& is);

}  // namespace v2v
