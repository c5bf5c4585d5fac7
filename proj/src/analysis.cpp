#include "polisim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "polisim/errors.hpp"
#include "polisim/plot.hpp"

namespace polisim {

double cumulative_cases(const RunLog& log) {
    double sum = 0.0;
    for (const DailyEntry& d : log.daily) sum += d.cases;
    return sum;
}

double cumulative_prediction_error(const RunLog& log) {
    const int interval = log.config.decision_interval;
    const int days = static_cast<int>(log.daily.size());
    double total = 0.0;
    for (const WeeklyEntry& entry : log.weekly) {
        if (!entry.agent_decided) continue;
        const int first_day = (entry.week - 1) * interval + 1;
        const int last_day = first_day + interval - 1;
        if (last_day > days) continue;  // trailing partial week has no full realized mean
        double realized = 0.0;
        for (int d = first_day; d <= last_day; ++d)
            realized += log.daily[static_cast<std::size_t>(d - 1)].cases;
        realized /= interval;
        total += std::abs(static_cast<double>(entry.decision.prediction_with_new_policy) -
                          realized);
    }
    return total;
}

double mean_transmission_reduction(const RunLog& log) {
    if (log.daily.empty()) return 1.0;
    double sum = 0.0;
    for (const DailyEntry& d : log.daily) sum += d.behavior * d.policy_factor;
    return sum / static_cast<double>(log.daily.size());
}

OlsResult ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n != y.size()) throw std::invalid_argument("X and y row counts differ");
    if (n <= p) throw SingularDesign("need more observations than regressors");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p) throw SingularDesign("design matrix is rank deficient");

    OlsResult result;
    result.n = n;
    result.p = p;
    result.coefficients = qr.solve(y);

    const Eigen::VectorXd residuals = y - X * result.coefficients;
    const double rss = residuals.squaredNorm();
    const double dof = static_cast<double>(n - p);
    const double sigma2 = rss / dof;

    const Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    result.standard_errors =
        (sigma2 * xtx_inv.diagonal().cwiseMax(0.0)).cwiseSqrt();

    result.t_statistics.resize(p);
    result.p_values.resize(p);
    const boost::math::students_t dist(dof);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double beta = result.coefficients(i);
        const double se = result.standard_errors(i);
        if (se <= 0.0) {
            result.t_statistics(i) =
                beta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            result.p_values(i) = beta == 0.0 ? 1.0 : 0.0;
            continue;
        }
        const double t = beta / se;
        result.t_statistics(i) = t;
        result.p_values(i) = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }

    const double tss = (y.array() - y.mean()).matrix().squaredNorm();
    if (tss > 0.0) {
        result.r_squared = 1.0 - rss / tss;
    } else {
        result.r_squared = rss <= 1e-12 ? 1.0 : 0.0;
    }
    result.adj_r_squared =
        1.0 - (1.0 - result.r_squared) * static_cast<double>(n - 1) / dof;
    return result;
}

int RegressionDataset::eligible_weeks_per_run() const {
    if (rows_per_run.empty()) return 0;
    for (int r : rows_per_run)
        if (r != rows_per_run.front()) return -1;
    return rows_per_run.front();
}

namespace {

bool has_knowledge(AgentKind kind) {
    return kind == AgentKind::Knowledge || kind == AgentKind::EnsembleKnowledge;
}

bool has_ensemble(AgentKind kind) {
    return kind == AgentKind::Ensemble || kind == AgentKind::EnsembleKnowledge;
}

struct Row {
    double last_week_cases;
    double last_week_decision;
    double avg_decision_in_memory;
    double avg_cases_in_memory;
    double knowledge;
    double ensemble;
    double response;
};

}  // namespace

RegressionDataset build_regression_dataset(const std::vector<const RunLog*>& logs,
                                           RegressionModel model, RegressionTarget target) {
    if (logs.empty()) throw std::invalid_argument("no logs to build a dataset from");
    const WorldMode world = logs.front()->config.world.mode;
    for (const RunLog* log : logs)
        if (log->config.world.mode != world)
            throw std::invalid_argument("regression datasets pool logs within one world");

    std::vector<Row> rows;
    std::vector<int> rows_per_run;
    for (const RunLog* log : logs) {
        const int interval = log->config.decision_interval;
        int count = 0;
        for (std::size_t wi = 0; wi < log->weekly.size(); ++wi) {
            const WeeklyEntry& entry = log->weekly[wi];
            if (!entry.agent_decided) continue;
            if (wi == 0) continue;  // no lagged decision
            if (entry.sampled_memory_indices.empty()) continue;

            double avg_decision = 0.0, avg_cases = 0.0;
            for (std::size_t idx : entry.sampled_memory_indices) {
                // Record idx corresponds to week idx+1; its realized outcome is
                // the daily case count on that week's decision day.
                const int decision_day = static_cast<int>(idx) * interval + 1;
                avg_decision += log->weekly[idx].restriction;
                avg_cases += log->daily[static_cast<std::size_t>(decision_day - 1)].cases;
            }
            const double m = static_cast<double>(entry.sampled_memory_indices.size());
            avg_decision /= m;
            avg_cases /= m;

            Row row;
            row.last_week_cases = entry.prev_week_mean_cases;
            row.last_week_decision = log->weekly[wi - 1].restriction;
            row.avg_decision_in_memory = avg_decision;
            row.avg_cases_in_memory = avg_cases;
            row.knowledge = has_knowledge(log->config.agent) ? 1.0 : 0.0;
            row.ensemble = has_ensemble(log->config.agent) ? 1.0 : 0.0;
            row.response =
                target == RegressionTarget::Prediction
                    ? static_cast<double>(entry.decision.prediction_with_new_policy)
                    : entry.restriction;
            rows.push_back(row);
            ++count;
        }
        rows_per_run.push_back(count);
    }

    std::vector<std::string> names{"last_week_cases", "last_week_decision"};
    if (model != RegressionModel::M1) {
        names.push_back("avg_decision_in_memory");
        names.push_back("avg_cases_in_memory");
    }
    if (model == RegressionModel::M3) {
        names.push_back("knowledge");
        names.push_back("ensemble");
        names.push_back("ensemble_x_knowledge");
    }
    names.push_back("constant");

    RegressionDataset ds;
    ds.regressor_names = names;
    ds.rows_per_run = std::move(rows_per_run);
    ds.X.resize(static_cast<Eigen::Index>(rows.size()),
                static_cast<Eigen::Index>(names.size()));
    ds.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        Eigen::Index c = 0;
        ds.X(static_cast<Eigen::Index>(i), c++) = r.last_week_cases;
        ds.X(static_cast<Eigen::Index>(i), c++) = r.last_week_decision;
        if (model != RegressionModel::M1) {
            ds.X(static_cast<Eigen::Index>(i), c++) = r.avg_decision_in_memory;
            ds.X(static_cast<Eigen::Index>(i), c++) = r.avg_cases_in_memory;
        }
        if (model == RegressionModel::M3) {
            ds.X(static_cast<Eigen::Index>(i), c++) = r.knowledge;
            ds.X(static_cast<Eigen::Index>(i), c++) = r.ensemble;
            ds.X(static_cast<Eigen::Index>(i), c++) = r.knowledge * r.ensemble;
        }
        ds.X(static_cast<Eigen::Index>(i), c) = 1.0;
        ds.y(static_cast<Eigen::Index>(i)) = r.response;
    }
    return ds;
}

namespace {

MetricStats stats_of(const std::vector<double>& values) {
    MetricStats s;
    if (values.empty()) return s;
    s.min = s.max = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(values.size());
    return s;
}

MetricStats indexed(const MetricStats& s, double base_mean) {
    MetricStats out;
    if (base_mean == 0.0) {
        out.mean = out.min = out.max = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.mean = s.mean / base_mean;
    out.min = s.min / base_mean;
    out.max = s.max / base_mean;
    return out;
}

int agent_order(AgentKind kind) {
    switch (kind) {
        case AgentKind::Base: return 0;
        case AgentKind::Knowledge: return 1;
        case AgentKind::Ensemble: return 2;
        case AgentKind::EnsembleKnowledge: return 3;
        case AgentKind::Scripted: return 4;
    }
    return 5;
}

std::string agent_label(AgentKind kind) {
    switch (kind) {
        case AgentKind::Base: return "Base";
        case AgentKind::Knowledge: return "Knowledge";
        case AgentKind::Ensemble: return "Ensemble";
        case AgentKind::EnsembleKnowledge: return "Ensemble+Knowledge";
        case AgentKind::Scripted: return "Scripted";
    }
    return "?";
}

std::string agent_color(AgentKind kind) {
    switch (kind) {
        case AgentKind::Base: return "#1f77b4";
        case AgentKind::Knowledge: return "#d62728";
        case AgentKind::Ensemble: return "#e6b800";
        case AgentKind::EnsembleKnowledge: return "#2ca02c";
        case AgentKind::Scripted: return "#7f7f7f";
    }
    return "#000000";
}

std::vector<LoadedCell> ordered(const std::vector<LoadedCell>& cells) {
    std::vector<LoadedCell> sorted = cells;
    std::sort(sorted.begin(), sorted.end(), [](const LoadedCell& a, const LoadedCell& b) {
        if (a.world != b.world) return a.world == WorldMode::World1;
        return agent_order(a.agent) < agent_order(b.agent);
    });
    return sorted;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<CellSummary> summarize_cells(const std::vector<LoadedCell>& cells) {
    std::map<WorldMode, double> base_cases_mean;
    std::map<WorldMode, double> base_error_mean;
    for (const LoadedCell& cell : cells) {
        if (cell.agent != AgentKind::Base) continue;
        std::vector<double> cases, error;
        for (const RunLog& log : cell.logs) {
            cases.push_back(cumulative_cases(log));
            error.push_back(cumulative_prediction_error(log));
        }
        base_cases_mean[cell.world] = stats_of(cases).mean;
        base_error_mean[cell.world] = stats_of(error).mean;
    }

    std::vector<CellSummary> summaries;
    for (const LoadedCell& cell : ordered(cells)) {
        CellSummary s;
        s.world = cell.world;
        s.agent = cell.agent;
        s.runs = static_cast<int>(cell.logs.size());
        std::vector<double> cases, reduction, error;
        for (const RunLog& log : cell.logs) {
            cases.push_back(cumulative_cases(log));
            reduction.push_back(mean_transmission_reduction(log));
            error.push_back(cumulative_prediction_error(log));
        }
        s.cases = stats_of(cases);
        s.reduction = stats_of(reduction);
        s.error = stats_of(error);
        const auto base_cases = base_cases_mean.find(cell.world);
        const auto base_error = base_error_mean.find(cell.world);
        s.indexed_cases = indexed(
            s.cases, base_cases != base_cases_mean.end() ? base_cases->second : 0.0);
        s.indexed_error = indexed(
            s.error, base_error != base_error_mean.end() ? base_error->second : 0.0);
        summaries.push_back(s);
    }
    return summaries;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<CellSummary>& summaries) {
    std::ofstream out = open_csv(path);
    out << "world,agent,runs"
        << ",cumulative_cases_mean,cumulative_cases_min,cumulative_cases_max"
        << ",indexed_cases_mean,indexed_cases_min,indexed_cases_max"
        << ",transmission_reduction_mean,transmission_reduction_min,transmission_reduction_max"
        << ",prediction_error_mean,prediction_error_min,prediction_error_max"
        << ",indexed_error_mean,indexed_error_min,indexed_error_max\n";
    for (const CellSummary& s : summaries) {
        out << to_string(s.world) << ',' << to_string(s.agent) << ',' << s.runs;
        for (const MetricStats* m :
             {&s.cases, &s.indexed_cases, &s.reduction, &s.error, &s.indexed_error})
            out << ',' << num(m->mean) << ',' << num(m->min) << ',' << num(m->max);
        out << '\n';
    }
}

namespace {

// Mean across runs of the daily case series (truncated to the shortest run).
std::vector<double> mean_daily_cases(const std::vector<RunLog>& logs) {
    std::size_t days = std::numeric_limits<std::size_t>::max();
    for (const RunLog& log : logs) days = std::min(days, log.daily.size());
    if (logs.empty() || days == std::numeric_limits<std::size_t>::max()) return {};
    std::vector<double> mean(days, 0.0);
    for (const RunLog& log : logs)
        for (std::size_t d = 0; d < days; ++d) mean[d] += log.daily[d].cases;
    for (double& v : mean) v /= static_cast<double>(logs.size());
    return mean;
}

// Mean across runs of the weekly mean transmission multiplier b*g.
std::vector<double> mean_weekly_multiplier(const std::vector<RunLog>& logs) {
    if (logs.empty()) return {};
    const int interval = logs.front().config.decision_interval;
    std::size_t weeks = std::numeric_limits<std::size_t>::max();
    for (const RunLog& log : logs) weeks = std::min(weeks, log.weekly.size());
    std::vector<double> mean(weeks, 0.0);
    for (const RunLog& log : logs) {
        for (std::size_t w = 0; w < weeks; ++w) {
            const std::size_t first = w * static_cast<std::size_t>(interval);
            const std::size_t last =
                std::min(first + static_cast<std::size_t>(interval), log.daily.size());
            double sum = 0.0;
            for (std::size_t d = first; d < last; ++d)
                sum += log.daily[d].behavior * log.daily[d].policy_factor;
            mean[w] += sum / static_cast<double>(last - first);
        }
    }
    for (double& v : mean) v /= static_cast<double>(logs.size());
    return mean;
}

std::vector<WorldMode> worlds_present(const std::vector<LoadedCell>& cells) {
    std::vector<WorldMode> worlds;
    for (const LoadedCell& c : cells)
        if (std::find(worlds.begin(), worlds.end(), c.world) == worlds.end())
            worlds.push_back(c.world);
    std::sort(worlds.begin(), worlds.end(),
              [](WorldMode a, WorldMode b) { return a == WorldMode::World1 && b != a; });
    return worlds;
}

}  // namespace

void write_timeseries_csvs(const std::filesystem::path& dir,
                           const std::vector<LoadedCell>& cells) {
    const std::vector<LoadedCell> sorted = ordered(cells);
    for (WorldMode world : worlds_present(sorted)) {
        std::vector<const LoadedCell*> in_world;
        for (const LoadedCell& c : sorted)
            if (c.world == world && !c.logs.empty()) in_world.push_back(&c);
        if (in_world.empty()) continue;

        {
            std::ofstream out =
                open_csv(dir / ("timeseries_cases_" + to_string(world) + ".csv"));
            out << "day";
            for (const LoadedCell* c : in_world) out << ',' << to_string(c->agent);
            out << '\n';
            std::vector<std::vector<double>> series;
            std::size_t days = 0;
            for (const LoadedCell* c : in_world) {
                series.push_back(mean_daily_cases(c->logs));
                days = std::max(days, series.back().size());
            }
            for (std::size_t d = 0; d < days; ++d) {
                out << (d + 1);
                for (const auto& s : series)
                    out << ',' << (d < s.size() ? num(s[d]) : "");
                out << '\n';
            }
        }
        {
            std::ofstream out =
                open_csv(dir / ("timeseries_transmission_" + to_string(world) + ".csv"));
            out << "week";
            for (const LoadedCell* c : in_world) out << ',' << to_string(c->agent);
            out << '\n';
            std::vector<std::vector<double>> series;
            std::size_t weeks = 0;
            for (const LoadedCell* c : in_world) {
                series.push_back(mean_weekly_multiplier(c->logs));
                weeks = std::max(weeks, series.back().size());
            }
            for (std::size_t w = 0; w < weeks; ++w) {
                out << (w + 1);
                for (const auto& s : series)
                    out << ',' << (w < s.size() ? num(s[w]) : "");
                out << '\n';
            }
        }
    }
}

void write_regression_csvs(const std::filesystem::path& dir,
                           const std::vector<LoadedCell>& cells) {
    static const std::vector<std::string> kTerms{
        "last_week_cases",       "last_week_decision", "avg_decision_in_memory",
        "avg_cases_in_memory",   "knowledge",          "ensemble",
        "ensemble_x_knowledge",  "constant"};

    for (WorldMode world : worlds_present(cells)) {
        std::vector<const RunLog*> logs;
        for (const LoadedCell& c : cells)
            if (c.world == world)
                for (const RunLog& log : c.logs) logs.push_back(&log);
        if (logs.empty()) continue;

        for (RegressionTarget target :
             {RegressionTarget::Prediction, RegressionTarget::Decision}) {
            const std::string target_name =
                target == RegressionTarget::Prediction ? "prediction" : "decision";
            std::ofstream out = open_csv(dir / ("regression_" + to_string(world) + "_" +
                                                target_name + ".csv"));
            out << "term,m1_coef,m1_se,m1_p,m2_coef,m2_se,m2_p,m3_coef,m3_se,m3_p\n";

            struct Fit {
                std::map<std::string, Eigen::Index> index;
                OlsResult result;
                bool ok = false;
                int rows = 0;
                int eligible = 0;
            };
            std::vector<Fit> fits;
            for (RegressionModel model :
                 {RegressionModel::M1, RegressionModel::M2, RegressionModel::M3}) {
                Fit fit;
                try {
                    RegressionDataset ds = build_regression_dataset(logs, model, target);
                    fit.rows = static_cast<int>(ds.X.rows());
                    fit.eligible = ds.eligible_weeks_per_run();
                    fit.result = ols_fit(ds.X, ds.y);
                    for (std::size_t i = 0; i < ds.regressor_names.size(); ++i)
                        fit.index[ds.regressor_names[i]] = static_cast<Eigen::Index>(i);
                    fit.ok = true;
                } catch (const SingularDesign&) {
                    fit.ok = false;
                }
                fits.push_back(std::move(fit));
            }

            for (const std::string& term : kTerms) {
                out << term;
                for (const Fit& fit : fits) {
                    const auto it = fit.index.find(term);
                    if (!fit.ok || it == fit.index.end()) {
                        out << ",,,";
                    } else {
                        const Eigen::Index i = it->second;
                        out << ',' << num(fit.result.coefficients(i)) << ','
                            << num(fit.result.standard_errors(i)) << ','
                            << num(fit.result.p_values(i));
                    }
                }
                out << '\n';
            }
            out << "n";
            for (const Fit& fit : fits) out << ',' << (fit.ok ? std::to_string(fit.rows) : "") << ",,";
            out << '\n';
            out << "eligible_weeks_per_run";
            for (const Fit& fit : fits)
                out << ',' << (fit.ok ? std::to_string(fit.eligible) : "") << ",,";
            out << '\n';
            out << "r_squared";
            for (const Fit& fit : fits)
                out << ',' << (fit.ok ? num(fit.result.r_squared) : "") << ",,";
            out << '\n';
            out << "adj_r_squared";
            for (const Fit& fit : fits)
                out << ',' << (fit.ok ? num(fit.result.adj_r_squared) : "") << ",,";
            out << '\n';
        }
    }
}

void emit_plots(const std::filesystem::path& dir, const std::vector<LoadedCell>& cells) {
    const std::vector<LoadedCell> sorted = ordered(cells);
    const std::vector<CellSummary> summaries = summarize_cells(sorted);

    for (WorldMode world : worlds_present(sorted)) {
        std::vector<const LoadedCell*> in_world;
        for (const LoadedCell& c : sorted)
            if (c.world == world && !c.logs.empty()) in_world.push_back(&c);
        if (in_world.empty()) continue;
        const std::string world_name = to_string(world);

        PlotPanel cases_panel;
        cases_panel.title = "Reported cases (mean over runs)";
        cases_panel.x_label = "day";
        cases_panel.y_label = "daily cases";
        PlotPanel multiplier_panel;
        multiplier_panel.title = "Transmission multiplier b*g (weekly mean over runs)";
        multiplier_panel.x_label = "week";
        multiplier_panel.y_label = "multiplier";
        for (const LoadedCell* c : in_world) {
            cases_panel.series.push_back(
                PlotSeries{agent_label(c->agent), agent_color(c->agent),
                           mean_daily_cases(c->logs)});
            multiplier_panel.series.push_back(
                PlotSeries{agent_label(c->agent), agent_color(c->agent),
                           mean_weekly_multiplier(c->logs)});
        }
        write_line_chart_svg(dir / ("timeseries_" + world_name + ".svg"),
                             "Daily trajectories, " + world_name,
                             {cases_panel, multiplier_panel});

        std::vector<BarDatum> cases_bars, reduction_bars, error_bars;
        for (const CellSummary& s : summaries) {
            if (s.world != world) continue;
            cases_bars.push_back(BarDatum{agent_label(s.agent), agent_color(s.agent),
                                          s.indexed_cases.mean, s.indexed_cases.min,
                                          s.indexed_cases.max});
            reduction_bars.push_back(BarDatum{agent_label(s.agent), agent_color(s.agent),
                                              s.reduction.mean, s.reduction.min,
                                              s.reduction.max});
            error_bars.push_back(BarDatum{agent_label(s.agent), agent_color(s.agent),
                                          s.indexed_error.mean, s.indexed_error.min,
                                          s.indexed_error.max});
        }
        write_bar_chart_svg(dir / ("bars_" + world_name + "_cumulative_cases.svg"),
                            "Cumulative cases indexed to Base, " + world_name,
                            "indexed cumulative cases", cases_bars);
        write_bar_chart_svg(dir / ("bars_" + world_name + "_transmission.svg"),
                            "Mean transmission reduction, " + world_name,
                            "mean b*g (1 = no suppression)", reduction_bars);
        write_bar_chart_svg(dir / ("bars_" + world_name + "_prediction_error.svg"),
                            "Cumulative prediction error indexed to Base, " + world_name,
                            "indexed prediction error", error_bars);
    }
}

}  // namespace polisim
