#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specshare/iterative.hpp"
#include "specshare/montecarlo.hpp"

namespace specshare {

using json = nlohmann::json;

// Shortest round-trip decimal form; deterministic across platforms that
// implement to_chars for doubles.
std::string fmt_double(double v);

// RFC-4180 field escaping: quotes a field containing comma, quote, CR or LF
// and doubles embedded quotes.
std::string csv_escape(const std::string& field);

// Builds a CSV document (CRLF line ends, header row first). Numeric cells
// should be pre-formatted with fmt_double.
class CsvBuilder {
public:
    explicit CsvBuilder(const std::vector<std::string>& header) { row(header); }
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return out_; }

private:
    std::string out_;
};

// Writes via a temp file + rename in the same directory.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Serializes with two-space indent and a trailing newline, atomically.
void write_json_file(const std::filesystem::path& path, const json& doc);

// Iterate trace export: iter, user, subchannel, power, utility, isr (the isr
// cell is empty for non-PU rows). Keeps every decimate-th iteration plus the
// last one; decimate 0 behaves like 1.
std::string trace_csv(const SolveTrace& trace, const NetworkConfig& cfg, std::size_t decimate);

// Ensemble curve export: iter, mean_u<user>..., n_traces (wide format).
std::string curve_csv(const ExperimentReport& rep, const NetworkConfig& cfg,
                      std::size_t decimate);

// Converged-mean powers: user, subchannel, mean_power.
std::string mean_powers_csv(const ExperimentReport& rep, const NetworkConfig& cfg);

// Aggregate report document (schema 1): outcome counts, means, curve shape.
json report_json(const ExperimentReport& rep, const NetworkConfig& cfg);

}  // namespace specshare
