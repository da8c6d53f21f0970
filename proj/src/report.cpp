#include "spotvol/report.hpp"

#include <cstdio>
#include <sstream>

namespace spotvol {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string format_g5(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5g", x);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

namespace {

void write_double_array(std::ostringstream& out, const std::vector<double>& xs) {
    out << "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out << ",";
        out << format_g17(xs[i]);
    }
    out << "]";
}

}  // namespace

std::string report_to_json(const ExperimentReport& report,
                           const std::string& config_text) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"format\": \"spotvol-report-v1\",\n";
    out << "  \"master_seed\": " << report.master_seed << ",\n";
    out << "  \"n_paths\": " << report.n_paths << ",\n";
    out << "  \"config\": \"" << json_escape(config_text) << "\",\n";
    out << "  \"tau_indices\": [";
    for (std::size_t i = 0; i < report.tau_indices.size(); ++i) {
        if (i) out << ",";
        out << report.tau_indices[i];
    }
    out << "],\n";
    out << "  \"estimators\": [";
    for (std::size_t e = 0; e < report.estimators.size(); ++e) {
        const EstimatorMetrics& m = report.estimators[e];
        out << (e ? ",\n" : "\n");
        out << "    {\n";
        out << "      \"name\": \"" << json_escape(m.name) << "\",\n";
        out << "      \"kind\": \"" << json_escape(m.kind) << "\",\n";
        out << "      \"tuning\": \"" << json_escape(m.tuning) << "\",\n";
        out << "      \"metrics\": {\"rmse\": " << format_g17(m.rmse)
            << ", \"are\": " << format_g17(m.are) << ", \"re\": " << format_g17(m.re)
            << "},\n";
        out << "      \"excluded_relative_points\": " << m.excluded_relative_points << ",\n";
        out << "      \"flags\": {\"guard\": " << m.flags.guard
            << ", \"clamp_a\": " << m.flags.clamp_a
            << ", \"clamp_corr\": " << m.flags.clamp_corr
            << ", \"negative\": " << m.flags.negative
            << ", \"clamped_to_zero\": " << m.flags.clamped_to_zero
            << ", \"errors\": " << m.flags.errors << "},\n";
        out << "      \"per_path\": {\"mse\": ";
        write_double_array(out, m.mse_j);
        out << ", \"ae\": ";
        write_double_array(out, m.ae_j);
        out << ", \"e\": ";
        write_double_array(out, m.e_j);
        out << "}\n    }";
    }
    out << "\n  ]\n}\n";
    return out.str();
}

std::string report_summary_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "# spotvol-summary-v1\n";
    out << "estimator,rmse,are,re,tuning\n";
    for (const EstimatorMetrics& m : report.estimators) {
        out << m.name << "," << format_g5(m.rmse) << "," << format_g5(m.are) << ","
            << format_g5(m.re) << ",\"" << m.tuning << "\"\n";
    }
    return out.str();
}

}  // namespace spotvol
