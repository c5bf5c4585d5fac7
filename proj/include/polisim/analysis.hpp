#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polisim/runlog.hpp"

namespace polisim {

// Total infections over the run: the sum of daily reported cases (the
// cumulative exposed-to-infectious flow).
double cumulative_cases(const RunLog& log);

// Sum over completed decision weeks of |predicted cases under the chosen
// policy - realized weekly mean daily cases|. Weeks before the agent's start
// and the trailing partial week contribute nothing.
double cumulative_prediction_error(const RunLog& log);

// Mean over days of the deterministic multiplier b*g (noise excluded);
// 1.0 means no suppression.
double mean_transmission_reduction(const RunLog& log);

struct OlsResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_statistics;
    Eigen::VectorXd p_values;  // two-sided, t distribution with n-p dof
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
};

// Least squares with classical (homoskedastic) standard errors. Throws
// SingularDesign when X is rank deficient or has no spare degrees of freedom.
OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

enum class RegressionModel { M1, M2, M3 };
enum class RegressionTarget { Prediction, Decision };

struct RegressionDataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> regressor_names;  // constant last
    std::vector<int> rows_per_run;             // eligible weeks contributed by each log

    // Common eligible-week count, or -1 when the runs disagree.
    int eligible_weeks_per_run() const;
};

// One row per (run, agent-decided week) with regressors: last week's mean
// cases, last week's restriction, mean restriction and mean cases over the
// memories sampled for that week's prompt, and (model 3) treatment dummies
// with their interaction. Rows missing any regressor are excluded.
RegressionDataset build_regression_dataset(const std::vector<const RunLog*>& logs,
                                           RegressionModel model, RegressionTarget target);

struct MetricStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct CellSummary {
    WorldMode world = WorldMode::World1;
    AgentKind agent = AgentKind::Base;
    int runs = 0;
    MetricStats cases;
    MetricStats reduction;
    MetricStats error;
    MetricStats indexed_cases;  // relative to the world-matched Base mean
    MetricStats indexed_error;
};

struct LoadedCell {
    WorldMode world = WorldMode::World1;
    AgentKind agent = AgentKind::Base;
    std::vector<RunLog> logs;
};

std::vector<CellSummary> summarize_cells(const std::vector<LoadedCell>& cells);

// Table emission. All files are deterministic byte-for-byte for unchanged
// inputs; headers document every column.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<CellSummary>& summaries);
void write_timeseries_csvs(const std::filesystem::path& dir,
                           const std::vector<LoadedCell>& cells);
void write_regression_csvs(const std::filesystem::path& dir,
                           const std::vector<LoadedCell>& cells);

// Figures: per world a two-panel time-series chart (mean daily cases and
// mean weekly transmission multiplier per condition) and three bar panels
// (cumulative cases and prediction error indexed to Base, transmission
// reduction raw) with min-max range whiskers.
void emit_plots(const std::filesystem::path& dir, const std::vector<LoadedCell>& cells);

}  // namespace polisim
