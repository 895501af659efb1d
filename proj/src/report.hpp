#pragma once

#include <string>
#include <vector>

#include "formats.hpp"

namespace ecco {

struct ReportStats {
    double mse = 0.0;
    bool has_log = false;
    double mean_entropy = 0.0; // mean per-group symbol entropy, bits
    double eta = 0.0;          // mean entropy / real bits per element
    double clip_ratio = 0.0;
    double pad_ratio = 0.0;
};

// bits_per_element is 4.0 for the 4x codec (512 bits / 128 elements).
ReportStats build_report(const TensorF16& orig, const TensorF16& recon,
                         const std::vector<EncodeLogRecord>* log,
                         double bits_per_element = 4.0);

void write_report_csv(const ReportStats& stats, const std::string& path);
void write_report_json(const ReportStats& stats, const std::string& path);
std::string report_to_text(const ReportStats& stats);

} // namespace ecco
