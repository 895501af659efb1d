#include "report.hpp"

#include <fstream>
#include <sstream>

#include "metrics.hpp"

#include <json.hpp>

namespace ecco {

ReportStats build_report(const TensorF16& orig, const TensorF16& recon,
                         const std::vector<EncodeLogRecord>* log,
                         double bits_per_element) {
    ReportStats stats;
    stats.mse = tensor_mse(orig, recon);
    if (!log || log->empty()) {
        return stats;
    }
    stats.has_log = true;
    std::vector<EncodeStats> enc;
    enc.reserve(log->size());
    double entropy_sum = 0.0;
    for (const EncodeLogRecord& rec : *log) {
        enc.push_back(rec.stats);
        SymbolHistogram h;
        for (size_t i = 0; i < 16; ++i) h.counts[i] = rec.stats.histogram[i];
        entropy_sum += entropy_bits(h);
    }
    stats.mean_entropy = entropy_sum / static_cast<double>(log->size());
    stats.eta = bit_efficiency(stats.mean_entropy, bits_per_element);
    const ClipPadRatios ratios = clip_pad_report(enc);
    stats.clip_ratio = ratios.clip_ratio;
    stats.pad_ratio = ratios.pad_ratio;
    return stats;
}

namespace {

nlohmann::json report_json(const ReportStats& s) {
    nlohmann::json j;
    j["mse"] = s.mse;
    if (s.has_log) {
        j["entropy_bits"] = s.mean_entropy;
        j["bit_efficiency"] = s.eta;
        j["clip_ratio"] = s.clip_ratio;
        j["pad_ratio"] = s.pad_ratio;
    }
    return j;
}

} // namespace

void write_report_csv(const ReportStats& s, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorCode::io, "cannot open " + path + " for writing");
    }
    out << "metric,value\n";
    out.precision(17);
    out << "mse," << s.mse << "\n";
    if (s.has_log) {
        out << "entropy_bits," << s.mean_entropy << "\n";
        out << "bit_efficiency," << s.eta << "\n";
        out << "clip_ratio," << s.clip_ratio << "\n";
        out << "pad_ratio," << s.pad_ratio << "\n";
    }
    if (!out) {
        raise(ErrorCode::io, "cannot write " + path);
    }
}

void write_report_json(const ReportStats& s, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        raise(ErrorCode::io, "cannot open " + path + " for writing");
    }
    out << report_json(s).dump(2) << "\n";
    if (!out) {
        raise(ErrorCode::io, "cannot write " + path);
    }
}

std::string report_to_text(const ReportStats& s) {
    std::ostringstream os;
    os.precision(10);
    os << "mse " << s.mse;
    if (s.has_log) {
        os << "  entropy " << s.mean_entropy << " bits"
           << "  eta " << s.eta
           << "  clip " << s.clip_ratio
           << "  pad " << s.pad_ratio;
    }
    return os.str();
}

} // namespace ecco
