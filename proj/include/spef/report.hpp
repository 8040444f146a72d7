#ifndef SPEF_REPORT_HPP
#define SPEF_REPORT_HPP

#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spef/core_model.hpp"
#include "spef/simulation.hpp"

namespace spef::report {

/// Malformed input; the message carries the line (and field) at fault.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Six significant digits, '.' decimal separator.
std::string format_number(double value);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string to_csv(const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Columns: config, estimator, parameter, mean, median, MSE, bias, sd, failures.
CsvTable summary_table();
void append_summaries(CsvTable& table, const std::string& config_label, const ExperimentReport& report);

/// Columns: the x label followed by one median column per curve.
CsvTable curve_table(const std::string& x_label, const std::vector<std::string>& curve_labels,
                     const std::vector<std::vector<CurvePoint>>& curves);

nlohmann::json config_json(const ExperimentConfig& config);
nlohmann::json switches_json(const ProfileOptions& options, const SearchConfig& profile_search,
                             const SearchConfig& rank_search);

/// `<out>.manifest.json`
std::filesystem::path manifest_path(const std::filesystem::path& out);

/// Header x1..xd,y[,delta]; delta in {0,1}, default 1.
Dataset read_dataset_csv(std::istream& in);

/// `key = value` lines; '#' starts a comment; blank lines are skipped.
std::map<std::string, std::string> read_key_values(std::istream& in);

/// Applies recognised keys on top of `base`; unknown keys are errors.
ExperimentConfig apply_config(const std::map<std::string, std::string>& values, ExperimentConfig base);

}  // namespace spef::report

#endif
