#include "specdyn/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "specdyn/text_io.hpp"

namespace specdyn {

namespace {

std::string fixed(double v, int digits = 4)
{
    if (!std::isfinite(v)) return format_double(v);
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(digits) << v;
    return ss.str();
}

PowerLawFit negate_slope(PowerLawFit f)
{
    f.exponent = -f.exponent;
    return f;
}

/// Pairs (x, y) of two trajectories at shared grid times.
template <class F>
void for_shared(const Trajectory& a, const Trajectory& b, F&& f)
{
    std::size_t j = 0;
    for (const auto& ra : a.records) {
        while (j < b.records.size() && b.records[j].t < ra.t * (1.0 - 1e-12)) ++j;
        if (j == b.records.size()) return;
        if (std::abs(b.records[j].t - ra.t) <= 1e-12 * ra.t) f(ra, b.records[j]);
    }
}

bool is_static_kind(const std::string& name)
{
    return name == "uniform" || name == "static";
}

bool is_paradigm(const std::string& name)
{
    return name == "probe" || name == "self-scoring" || name == "ensemble";
}

Check make_check(std::string name, std::string criterion, double value, bool passed, bool declared = true)
{
    return Check{std::move(name), std::move(criterion), value, passed, declared};
}

}  // namespace

PowerLawFit fit_power_law(std::span<const double> xs, std::span<const double> ys, Window window)
{
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("fit_power_law: xs and ys differ in length");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!window.contains(xs[i])) continue;
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw std::invalid_argument("fit_power_law: values inside the window must be > 0");
        }
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    const std::size_t n = lx.size();
    if (n < kMinFitPoints) {
        throw std::invalid_argument("fit_power_law: window holds " + std::to_string(n) + " points, need at least "
                                    + std::to_string(kMinFitPoints));
    }
    const double dn = static_cast<double>(n);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= dn;
    my /= dn;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = lx[i] - mx;
        const double dy = ly[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("fit_power_law: x values inside the window are all equal");
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (intercept + slope * lx[i]);
        ssr += r * r;
    }
    PowerLawFit fit;
    fit.exponent = -slope;
    fit.log_prefactor = intercept;
    fit.stderr_ = std::sqrt(ssr / (dn - 2.0) / sxx);
    fit.window = window;
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    fit.points = n;
    return fit;
}

PowerLawFit fit_spectrum_tail(std::span<const double> values, std::size_t lo, std::size_t hi)
{
    if (lo < 1 || hi > values.size() || lo >= hi) {
        throw std::invalid_argument("fit_spectrum_tail: index window outside the spectrum");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = lo; k <= hi; ++k) {
        if (values[k - 1] > 0.0) {
            xs.push_back(static_cast<double>(k));
            ys.push_back(values[k - 1]);
        }
    }
    return fit_power_law(xs, ys, Window{static_cast<double>(lo), static_cast<double>(hi)});
}

TrajectoryFits trajectory_exponents(const Trajectory& traj, Window window)
{
    double t_min = 0.0;
    double t_max = 0.0;
    std::size_t inside = 0;
    for (const auto& r : traj.records) {
        if (!window.contains(r.t)) continue;
        if (r.k_star < 1) {
            throw std::invalid_argument("trajectory_exponents: frontier is 0 inside the window (" + traj.policy + ")");
        }
        if (r.k_star >= traj.K) {
            throw std::invalid_argument("trajectory_exponents: frontier saturated at K inside the window ("
                                        + traj.policy + ")");
        }
        if (inside++ == 0) t_min = r.t;
        t_max = r.t;
    }
    // The records must reach both window edges to within one grid step at
    // the coarsest allowed density (16 per decade).
    const double step = std::pow(10.0, 1.0 / 16.0);
    if (inside == 0 || window.hi < 100.0 * window.lo * (1.0 - 1e-9) || t_min > window.lo * step
        || t_max < window.hi / step) {
        throw std::invalid_argument("trajectory_exponents: fewer than two decades of records in the window ("
                                    + traj.policy + ")");
    }
    const auto ts = traj.times();
    TrajectoryFits fits;
    fits.frontier = negate_slope(fit_power_law(ts, traj.frontiers(), window));
    fits.loss = fit_power_law(ts, traj.frontier_losses(), window);
    fits.exact_loss = fit_power_law(ts, traj.losses(), window);
    return fits;
}

std::optional<Window> common_unsaturated_span(std::span<const Trajectory* const> trajs)
{
    if (trajs.empty()) return std::nullopt;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (const Trajectory* tr : trajs) {
        double first = 0.0;
        double last = 0.0;
        bool any = false;
        for (const auto& r : tr->records) {
            if (r.k_star >= 1 && r.k_star < tr->K) {
                if (!any) first = r.t;
                last = r.t;
                any = true;
            }
        }
        if (!any) return std::nullopt;
        lo = std::max(lo, first);
        hi = std::min(hi, last);
    }
    if (!(hi > lo)) return std::nullopt;
    return Window{lo, hi};
}

Window middle_two_decades(Window span)
{
    if (span.hi < 100.0 * span.lo * (1.0 - 1e-9)) {
        throw std::invalid_argument("middle_two_decades: span covers fewer than two decades");
    }
    const double c = std::sqrt(span.lo * span.hi);
    return Window{c / 10.0, c * 10.0};
}

Window last_two_decades(Window span)
{
    if (span.hi < 100.0 * span.lo * (1.0 - 1e-9)) {
        throw std::invalid_argument("last_two_decades: span covers fewer than two decades");
    }
    return Window{span.hi / 100.0, span.hi};
}

Predictions predictions(const ModelParams& m)
{
    if (!(m.a > 1.0) || !(m.b > 1.0) || !(m.p > 0.0) || !(m.q > 0.0)) {
        throw std::invalid_argument("predictions: need a > 1, b > 1, p > 0, q > 0");
    }
    Predictions pr;
    pr.rho = m.q / m.p;
    pr.static_frontier = pr.rho / m.b;
    pr.oracle_frontier = pr.rho;
    pr.static_loss = (m.a - 1.0) * pr.rho / m.b;
    pr.oracle_loss = m.a * pr.rho / m.b;
    return pr;
}

bool ExponentReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.declared || c.passed; });
}

ExponentReport build_report(const std::map<std::string, Trajectory>& trajs, const ModelParams& params,
                            const ReportOptions& options)
{
    if (trajs.empty()) {
        throw std::invalid_argument("build_report: no trajectories");
    }
    const std::size_t K = trajs.begin()->second.K;
    for (const auto& [name, tr] : trajs) {
        if (tr.K != K) throw std::invalid_argument("build_report: trajectories differ in K");
    }

    ExponentReport rep;
    rep.params = params;
    rep.predictions = predictions(params);
    rep.tolerances = options.tolerances;
    const Tolerances& tol = rep.tolerances;

    std::vector<const Trajectory*> all;
    for (const auto& [name, tr] : trajs) all.push_back(&tr);
    if (options.window) {
        rep.window = *options.window;
    } else {
        const auto span = common_unsaturated_span(all);
        if (!span) throw std::invalid_argument("build_report: trajectories share no unsaturated time span");
        rep.window = middle_two_decades(*span);
    }

    for (const auto& [name, tr] : trajs) {
        PolicyReport pr;
        pr.policy = name;
        pr.fits = trajectory_exponents(tr, rep.window);
        pr.final_k_star = tr.records.empty() ? 0 : tr.records.back().k_star;
        pr.completed_at = tr.completed_at;
        if (is_static_kind(name)) {
            pr.predicted_frontier = rep.predictions.static_frontier;
            pr.predicted_loss = rep.predictions.static_loss;
        } else if (name == "oracle") {
            pr.predicted_frontier = rep.predictions.oracle_frontier;
            pr.predicted_loss = rep.predictions.oracle_loss;
        }
        if (pr.predicted_frontier) {
            const double e = pr.fits.frontier.exponent;
            rep.checks.push_back(make_check(name + " frontier exponent",
                                            "|fit - " + fixed(*pr.predicted_frontier, 3) + "| <= " + fixed(tol.frontier, 2),
                                            e, std::abs(e - *pr.predicted_frontier) <= tol.frontier));
            const double l = pr.fits.loss.exponent;
            rep.checks.push_back(make_check(name + " loss exponent",
                                            "|fit - " + fixed(*pr.predicted_loss, 3) + "| <= " + fixed(tol.loss, 2), l,
                                            std::abs(l - *pr.predicted_loss) <= tol.loss));
        }
        rep.policies.emplace(name, std::move(pr));
    }

    auto frontier_exp = [&](const std::string& n) { return rep.policies.at(n).fits.frontier.exponent; };
    const bool has_uniform = trajs.count("uniform") > 0;
    const bool has_oracle = trajs.count("oracle") > 0;

    if (has_uniform && has_oracle) {
        const Trajectory& u = trajs.at("uniform");
        const Trajectory& o = trajs.at("oracle");
        double worst = -std::numeric_limits<double>::infinity();
        double worst_exact = -std::numeric_limits<double>::infinity();
        std::size_t shared = 0;
        for_shared(o, u, [&](const TrajectoryRecord& ro, const TrajectoryRecord& ru) {
            worst = std::max(worst, ro.frontier_loss / ru.frontier_loss);
            worst_exact = std::max(worst_exact, ro.loss / ru.loss);
            ++shared;
        });
        rep.checks.push_back(make_check("oracle frontier loss <= uniform at every shared time",
                                        "max ratio <= 1 over " + std::to_string(shared) + " times", worst,
                                        shared > 0 && worst <= 1.0 + 1e-12));
        rep.checks.push_back(make_check("oracle exact loss <= uniform at every shared time (diagnostic)",
                                        "max ratio <= 1", worst_exact, worst_exact <= 1.0 + 1e-12, false));
    }

    if (has_uniform && trajs.count("boost") > 0) {
        const Trajectory& u = trajs.at("uniform");
        const Trajectory& bt = trajs.at("boost");
        BoostDiagnostics bd;
        bd.K0 = options.boost_K0;
        bd.min_ratio_inside = std::numeric_limits<double>::infinity();
        std::vector<double> rt;
        std::vector<double> ratio;
        for_shared(bt, u, [&](const TrajectoryRecord& rb, const TrajectoryRecord& ru) {
            if (ru.k_star < 1) return;
            const double r = static_cast<double>(rb.k_star) / static_cast<double>(ru.k_star);
            rt.push_back(rb.t);
            ratio.push_back(r);
            if (rb.k_star < bd.K0) {
                bd.min_ratio_inside = std::min(bd.min_ratio_inside, r);
                ++bd.inside_points;
            }
        });
        const Trajectory* pair[] = {&u, &bt};
        const auto span = common_unsaturated_span(pair);
        if (!span) throw std::invalid_argument("build_report: boost and uniform share no unsaturated span");
        bd.late_window = last_two_decades(*span);
        bd.late_exponent_boost = trajectory_exponents(bt, bd.late_window).frontier.exponent;
        bd.late_exponent_uniform = trajectory_exponents(u, bd.late_window).frontier.exponent;

        std::vector<double> late;
        for (std::size_t i = 0; i < rt.size(); ++i) {
            if (rt[i] >= span->hi / 10.0 * (1.0 - 1e-9)) late.push_back(ratio[i]);
        }
        if (!late.empty()) {
            std::nth_element(late.begin(), late.begin() + static_cast<std::ptrdiff_t>(late.size() / 2), late.end());
            bd.late_ratio_limit = late[late.size() / 2];
            for (std::size_t i = 0; i < rt.size(); ++i) {
                if (std::abs(ratio[i] / bd.late_ratio_limit - 1.0) <= tol.crossover) {
                    bd.crossover_time = rt[i];
                    break;
                }
            }
        }
        rep.checks.push_back(make_check("boost/uniform frontier ratio while k* < K0",
                                        "min ratio > " + fixed(tol.boost_ratio, 2) + " over "
                                            + std::to_string(bd.inside_points) + " times",
                                        bd.min_ratio_inside, bd.inside_points > 0 && bd.min_ratio_inside > tol.boost_ratio));
        const double d = bd.late_exponent_boost - bd.late_exponent_uniform;
        rep.checks.push_back(make_check("boost late-window frontier exponent vs uniform",
                                        "|delta| <= " + fixed(tol.frontier, 2), d, std::abs(d) <= tol.frontier));
        rep.boost = bd;
    }

    if (has_uniform) {
        for (const char* synth : {"synthetic-self"}) {
            if (!trajs.count(synth)) continue;
            const double d = frontier_exp(synth) - frontier_exp("uniform");
            rep.checks.push_back(make_check(std::string(synth) + " frontier exponent minus uniform",
                                            "delta < " + fixed(tol.ordering, 2), d, d < tol.ordering));
        }
    }

    for (const auto& [name, pr] : rep.policies) {
        if (!is_paradigm(name)) continue;
        const double e = pr.fits.frontier.exponent;
        if (has_uniform) {
            const double u = frontier_exp("uniform");
            rep.checks.push_back(make_check("uniform <= " + name + " + " + fixed(tol.ordering, 2),
                                            "uniform - " + name + " <= " + fixed(tol.ordering, 2), u - e,
                                            u <= e + tol.ordering));
        }
        if (has_oracle) {
            const double o = frontier_exp("oracle");
            rep.checks.push_back(make_check(name + " <= oracle + " + fixed(tol.ordering, 2),
                                            name + " - oracle <= " + fixed(tol.ordering, 2), e - o,
                                            e <= o + tol.ordering));
        }
    }
    return rep;
}

std::string report_text(const ExponentReport& rep)
{
    std::ostringstream out;
    out << "window  t in [" << format_double(rep.window.lo) << ", " << format_double(rep.window.hi) << "]\n";
    out << "params  a=" << format_double(rep.params.a) << " b=" << format_double(rep.params.b)
        << " p=" << format_double(rep.params.p) << " q=" << format_double(rep.params.q) << "  rho=" << fixed(rep.predictions.rho)
        << "\n";
    out << "predictions  static frontier " << fixed(rep.predictions.static_frontier) << "  oracle frontier "
        << fixed(rep.predictions.oracle_frontier) << "  static loss " << fixed(rep.predictions.static_loss)
        << "  oracle loss " << fixed(rep.predictions.oracle_loss) << "\n\n";

    out << std::left << std::setw(20) << "policy" << std::right << std::setw(10) << "frontier" << std::setw(10)
        << "pred" << std::setw(10) << "loss" << std::setw(10) << "pred" << std::setw(12) << "exact_loss"
        << std::setw(10) << "r2" << std::setw(8) << "k*_end" << "\n";
    for (const auto& [name, pr] : rep.policies) {
        out << std::left << std::setw(20) << name << std::right << std::setw(10) << fixed(pr.fits.frontier.exponent)
            << std::setw(10) << (pr.predicted_frontier ? fixed(*pr.predicted_frontier) : std::string("-"))
            << std::setw(10) << fixed(pr.fits.loss.exponent) << std::setw(10)
            << (pr.predicted_loss ? fixed(*pr.predicted_loss) : std::string("-")) << std::setw(12)
            << (pr.fits.exact_loss ? fixed(pr.fits.exact_loss->exponent) : std::string("-")) << std::setw(10)
            << fixed(pr.fits.frontier.r_squared) << std::setw(8) << pr.final_k_star << "\n";
    }
    if (rep.boost) {
        const auto& b = *rep.boost;
        out << "\nboost  K0=" << b.K0 << "  min ratio while k*<K0 " << fixed(b.min_ratio_inside) << " ("
            << b.inside_points << " times)  late window [" << format_double(b.late_window.lo) << ", "
            << format_double(b.late_window.hi) << "]  late exponents boost " << fixed(b.late_exponent_boost)
            << " uniform " << fixed(b.late_exponent_uniform) << "  ratio limit " << fixed(b.late_ratio_limit)
            << "  crossover t " << (b.crossover_time ? format_double(*b.crossover_time) : std::string("-")) << "\n";
    }
    out << "\n";
    for (const auto& c : rep.checks) {
        out << (c.passed ? "PASS" : "FAIL") << (c.declared ? "  " : "* ") << c.name << "  [" << c.criterion
            << "]  value " << fixed(c.value, 6) << "\n";
    }
    out << (rep.all_passed() ? "all declared tolerances pass" : "some declared tolerances fail") << "\n";
    if (std::any_of(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return !c.declared; })) {
        out << "(* diagnostic, does not affect the exit status)\n";
    }
    return out.str();
}

}  // namespace specdyn
