#include "specshare/csvjson.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace specshare {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc())
        throw std::runtime_error("fmt_double: conversion failed");
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ += ',';
        out_ += csv_escape(cells[i]);
    }
    out_ += "\r\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    write_file_atomic(path, doc.dump(2) + "\n");
}

namespace {

bool keep_row(std::size_t t, std::size_t last, std::size_t decimate) {
    if (decimate <= 1) return true;
    return t % decimate == 0 || t == last;
}

}  // namespace

std::string trace_csv(const SolveTrace& trace, const NetworkConfig& cfg, std::size_t decimate) {
    CsvBuilder csv({"iter", "user", "subchannel", "power", "utility", "isr"});
    const std::size_t T = trace.iterates.size();
    for (std::size_t t = 0; t < T; ++t) {
        if (!keep_row(t, T - 1, decimate)) continue;
        const PowerProfile& prof = trace.iterates[t];
        for (std::size_t u = 0; u < cfg.n_users; ++u) {
            for (std::size_t f = 0; f < cfg.n_sub; ++f) {
                std::string cell;
                for (std::size_t k = 0; k < cfg.pus.size(); ++k)
                    if (cfg.pus[k] == u) cell = fmt_double(trace.isr_per_iter[t][k][f]);
                csv.row({std::to_string(t + 1), std::to_string(u + 1), std::to_string(f + 1),
                         fmt_double(prof.at(u, f)), fmt_double(trace.utilities_per_iter[t][u]),
                         cell});
            }
        }
    }
    return csv.str();
}

std::string curve_csv(const ExperimentReport& rep, const NetworkConfig& cfg,
                      std::size_t decimate) {
    std::vector<std::string> header{"iter"};
    for (std::size_t u = 0; u < cfg.n_users; ++u)
        header.push_back("mean_u" + std::to_string(u + 1));
    header.push_back("n_traces");
    CsvBuilder csv(header);
    if (rep.mean_curves.empty()) return csv.str();
    const std::size_t T = rep.mean_curves.front().size();
    for (std::size_t t = 0; t < T; ++t) {
        if (!keep_row(t, T - 1, decimate)) continue;
        std::vector<std::string> row{std::to_string(t + 1)};
        for (std::size_t u = 0; u < cfg.n_users; ++u)
            row.push_back(fmt_double(rep.mean_curves[u][t]));
        row.push_back(std::to_string(rep.curve_total));
        csv.row(row);
    }
    return csv.str();
}

std::string mean_powers_csv(const ExperimentReport& rep, const NetworkConfig& cfg) {
    CsvBuilder csv({"user", "subchannel", "mean_power"});
    if (rep.mean_powers.empty()) return csv.str();
    for (std::size_t u = 0; u < cfg.n_users; ++u)
        for (std::size_t f = 0; f < cfg.n_sub; ++f)
            csv.row({std::to_string(u + 1), std::to_string(f + 1),
                     fmt_double(rep.mean_powers[u * cfg.n_sub + f])});
    return csv.str();
}

json report_json(const ExperimentReport& rep, const NetworkConfig& cfg) {
    json doc;
    doc["schema"] = 1;
    doc["realizations"] = rep.realizations;
    json counts;
    counts["converged"] = rep.counts.converged;
    counts["max_iterations"] = rep.counts.max_iterations;
    counts["oscillating"] = rep.counts.oscillating;
    counts["infeasible_isr"] = rep.counts.infeasible_isr;
    counts["infeasible_leader"] = rep.counts.infeasible_leader;
    counts["solver_error"] = rep.counts.solver_error;
    doc["counts"] = counts;
    doc["fraction_converged"] = rep.fraction_converged;
    doc["mean_iterations"] = rep.mean_iterations;
    doc["curve_realizations"] = rep.curve_total;
    if (!rep.mean_powers.empty()) {
        json rows = json::array();
        for (std::size_t u = 0; u < cfg.n_users; ++u) {
            json row = json::array();
            for (std::size_t f = 0; f < cfg.n_sub; ++f)
                row.push_back(rep.mean_powers[u * cfg.n_sub + f]);
            rows.push_back(row);
        }
        doc["mean_powers"] = rows;
        doc["mean_utilities"] = rep.mean_utilities;
    }
    if (!rep.error_samples.empty()) doc["error_samples"] = rep.error_samples;
    return doc;
}

}  // namespace specshare
