#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fhvar/model.hpp"
#include "fhvar/posterior.hpp"
#include "fhvar/simulation.hpp"
#include "fhvar/state.hpp"

namespace fhvar {

/// Shortest decimal representation that parses back to the identical
/// double (round-trip safe).
std::string format_double(double value);

/// Parses a full string as a double; throws ValidationError otherwise.
double parse_double(const std::string& text);

/// Reads an area-level dataset from CSV. Required columns: x, s2, n;
/// mean covariates z1..zp (an intercept column must be supplied
/// explicitly); optional variance covariates w1..wq. Errors name the
/// offending row and column.
Dataset read_dataset_csv(const std::filesystem::path& path);

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset);

/// Writes retained draws, one row per draw: draw index followed by the
/// flattened parameters. Byte-identical for identical chains.
void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws);

struct DrawsTable {
    std::vector<std::string> names;  ///< parameter columns (index column dropped)
    Eigen::MatrixXd values;          ///< n_draws x n_parameters
};

DrawsTable read_draws_csv(const std::filesystem::path& path);

std::string condition_report_to_json(const ConditionReport& report);
std::string condition_report_to_text(const ConditionReport& report);

/// Quantile levels needed to report equal-tailed intervals at the given
/// interval levels (plus the median), sorted and deduplicated.
std::vector<double> quantile_levels_for_intervals(const std::vector<double>& interval_levels);

struct FitMeta {
    std::string model;
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    std::size_t draws = 0;
    std::size_t thin = 1;
    std::optional<double> mh_accept_rate;
    std::optional<double> dic;
    std::optional<double> mean_deviance;
};

/// Summary JSON for a fit: run metadata plus per-parameter mean, sd,
/// median, and equal-tailed intervals at the requested levels.
std::string fit_summary_to_json(const Summary& summary, const std::vector<double>& interval_levels,
                                const FitMeta& meta);

/// Summary JSON recomputed from stored draws (no run metadata).
std::string bare_summary_to_json(const Summary& summary,
                                 const std::vector<double>& interval_levels);

std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report);

}  // namespace fhvar
