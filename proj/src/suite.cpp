#include "specdyn/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Core>

#include "specdyn/operator_lab.hpp"
#include "specdyn/random.hpp"
#include "specdyn/text_io.hpp"

namespace specdyn {

namespace {

using nlohmann::json;

Check check(std::string name, std::string criterion, double value, bool passed, bool declared = true)
{
    return Check{std::move(name), std::move(criterion), value, passed, declared};
}

json fit_json(const PowerLawFit& f)
{
    return json{{"exponent", f.exponent},     {"log_prefactor", f.log_prefactor},
                {"stderr", f.stderr_},        {"window", {f.window.lo, f.window.hi}},
                {"r_squared", f.r_squared},   {"points", f.points}};
}

json checks_json(const std::vector<Check>& checks)
{
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back(json{{"name", c.name},
                           {"criterion", c.criterion},
                           {"value", c.value},
                           {"passed", c.passed},
                           {"declared", c.declared}});
    }
    return arr;
}

std::string checks_text(const std::vector<Check>& checks)
{
    std::ostringstream out;
    for (const auto& c : checks) {
        out << (c.passed ? "PASS" : "FAIL") << (c.declared ? "  " : "* ") << c.name << "  [" << c.criterion
            << "]  value " << format_double(c.value) << "\n";
    }
    return out.str();
}

double draw_cap(const std::pair<double, double>& cap, Rng& rng)
{
    return cap.first == cap.second ? cap.first : uniform(rng, cap.first, cap.second);
}

json policy_json(const SamplerPolicy& policy)
{
    json j{{"kind", policy_kind(policy)}, {"normalization",
                                            normalization_of(policy) == Normalization::sample_mass ? "sample-mass"
                                                                                                   : "spectral-mass"}};
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, StaticBoost>) {
                j["K0"] = p.K0;
                j["boost"] = p.boost;
            } else if constexpr (std::is_same_v<P, Oracle>) {
                j["kappa_ref"] = p.kappa_ref;
            } else if constexpr (std::is_same_v<P, OnlineProbe>) {
                j["probe_C_beta"] = p.probe_kernel.C_beta;
                j["sharpness"] = p.sharpness;
            } else if constexpr (std::is_same_v<P, SelfScoring>) {
                j["gamma"] = p.gamma;
            } else if constexpr (std::is_same_v<P, Ensemble>) {
                j["frontiers"] = p.frontiers;
                json rates = json::array();
                for (const auto& t : p.teachers) rates.push_back(t.C_beta);
                j["teacher_C_beta"] = rates;
            } else if constexpr (std::is_same_v<P, Synthetic>) {
                j["mix"] = p.mix;
                if (p.source == SyntheticSource::teacher) j["teacher_K"] = p.teacher_K;
            }
        },
        policy);
    return j;
}

SuiteResult run_verify_exponent(const ExperimentConfig& cfg)
{
    const auto started = std::chrono::steady_clock::now();
    const std::size_t n = *cfg.n;
    const double b = *cfg.b;
    const PowerLawSpectrum spec = make_spectrum(b, cfg.C0, cfg.K.value_or(n));
    const std::size_t lo = n / 32;
    const std::size_t hi = n / 2;

    const KernelMatrix T = synthesize_kernel(spec, n, cfg.seed);
    const EigenSpectrum eT = eig_desc(T, true);
    const double lmax = eT.values.front();
    const double b_T = fit_spectrum_tail(eT.values, lo, hi).exponent;

    // T^{1/2} for the transported comparison T^{1/2} W T^{1/2} ⪯ cap·T.
    Eigen::VectorXd root(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) root(static_cast<Eigen::Index>(i)) = std::sqrt(eT.values[i]);
    const Eigen::MatrixXd& V = *eT.basis;
    const Eigen::MatrixXd half = V * root.asDiagonal() * V.transpose();

    // Identity baseline.
    const KernelMatrix T1 = reweight(T, SamplingWeights::uniform(n));
    const double id_entry = (T1.entries() - T.entries()).cwiseAbs().maxCoeff();
    const EigenSpectrum e1 = eig_desc(T1);
    double id_eig = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double denom = std::max(std::abs(eT.values[k]), std::numeric_limits<double>::min());
        id_eig = std::max(id_eig, std::abs(e1.values[k] - eT.values[k]) / denom);
    }

    std::ostringstream trials_csv;
    trials_csv << "trial,cap,b_hat_T,b_hat_Tw,delta,worst_eig_ratio,corollary,min_gap_eig,loewner,"
                  "transported_min_gap_eig,transported_loewner\n";
    std::vector<std::vector<double>> spectra;
    double worst_delta = 0.0;
    double worst_ratio = 0.0;
    double worst_gap = std::numeric_limits<double>::infinity();
    double worst_tgap = std::numeric_limits<double>::infinity();
    std::size_t delta_ok = 0;
    std::size_t corollary_ok = 0;
    std::size_t loewner_ok = 0;
    std::size_t transported_ok = 0;
    json trials = json::array();

    for (std::size_t i = 0; i < cfg.trials; ++i) {
        Rng rng = make_rng(cfg.seed, "weights/" + std::to_string(i));
        const double cap = draw_cap(*cfg.cap, rng);
        const SamplingWeights w = random_bounded_weights(n, cap, rng);
        const KernelMatrix Tw = reweight(T, w);
        const EigenSpectrum ew = eig_desc(Tw);
        const double b_w = fit_spectrum_tail(ew.values, lo, hi).exponent;
        const double delta = std::abs(b_w - b_T);

        const double floor = 1e-12 * cap * lmax;
        bool corollary = true;
        double ratio = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double bound = cap * eT.values[k];
            if (ew.values[k] > bound * (1.0 + 1e-8) + floor) corollary = false;
            if (bound > floor) ratio = std::max(ratio, ew.values[k] / bound);
        }

        const Eigen::MatrixXd gap = cap * T.entries() - Tw.entries();
        const double min_gap = symmetric_eigenvalues(gap).back();
        const bool loewner = min_gap >= -kPsdTol * lmax;

        Eigen::VectorXd wv(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) wv(static_cast<Eigen::Index>(k)) = w[k];
        Eigen::MatrixXd moved = half * wv.asDiagonal() * half;
        moved = 0.5 * (moved + moved.transpose()).eval();
        const Eigen::MatrixXd tgap = cap * T.entries() - moved;
        const double min_tgap = symmetric_eigenvalues(0.5 * (tgap + tgap.transpose())).back();
        const bool transported = min_tgap >= -kPsdTol * lmax;

        worst_delta = std::max(worst_delta, delta);
        worst_ratio = std::max(worst_ratio, ratio);
        worst_gap = std::min(worst_gap, min_gap / lmax);
        worst_tgap = std::min(worst_tgap, min_tgap / lmax);
        delta_ok += delta < 0.1;
        corollary_ok += corollary;
        loewner_ok += loewner;
        transported_ok += transported;

        trials_csv << i << ',' << format_double(cap) << ',' << format_double(b_T) << ',' << format_double(b_w) << ','
                   << format_double(delta) << ',' << format_double(ratio) << ',' << (corollary ? 1 : 0) << ','
                   << format_double(min_gap) << ',' << (loewner ? 1 : 0) << ',' << format_double(min_tgap) << ','
                   << (transported ? 1 : 0) << '\n';
        trials.push_back(json{{"trial", i},
                              {"cap", cap},
                              {"b_hat_Tw", b_w},
                              {"delta", delta},
                              {"worst_eig_ratio", ratio},
                              {"min_gap_eig", min_gap},
                              {"transported_min_gap_eig", min_tgap}});
        spectra.push_back(ew.values);
    }

    std::ostringstream spectra_csv;
    spectra_csv << "k,T";
    for (std::size_t i = 0; i < spectra.size(); ++i) spectra_csv << ",Tw_" << i;
    spectra_csv << '\n';
    for (std::size_t k = 0; k < n; ++k) {
        spectra_csv << (k + 1) << ',' << format_double(eT.values[k]);
        for (const auto& s : spectra) spectra_csv << ',' << format_double(s[k]);
        spectra_csv << '\n';
    }

    const std::size_t N = cfg.trials;
    const std::string of = "/" + std::to_string(N);
    SuiteResult res;
    res.mode = cfg.mode;
    res.checks.push_back(check("exponent delta < 0.1 in every trial", std::to_string(delta_ok) + of + " trials",
                               worst_delta, delta_ok == N));
    res.checks.push_back(check("eigenvalue corollary lambda_k(T_w) <= cap*lambda_k(T)*(1+1e-8)",
                               std::to_string(corollary_ok) + of + " trials", worst_ratio, corollary_ok == N));
    res.checks.push_back(check("identity weights reproduce T entrywise", "max |T_1 - T| <= 1e-12", id_entry,
                               id_entry <= 1e-12));
    res.checks.push_back(check("identity weights reproduce the spectrum", "max relative deviation <= 1e-10", id_eig,
                               id_eig <= 1e-10));
    res.checks.push_back(check("T^{1/2} W T^{1/2} <= cap*T (Loewner)",
                               std::to_string(transported_ok) + of + " trials, min eig / lambda_max", worst_tgap,
                               transported_ok == N));
    res.checks.push_back(check("cap*T - T_w >= 0 (direct Loewner; known false for general kernels)",
                               std::to_string(loewner_ok) + of + " trials, min eig / lambda_max", worst_gap,
                               loewner_ok == N, false));

    res.files.push_back({"trials.csv", trials_csv.str()});
    res.files.push_back({"spectra.csv", spectra_csv.str()});
    res.summary.push_back(std::to_string(delta_ok) + of + " exponent deltas < 0.1");
    res.summary.push_back(std::to_string(corollary_ok) + of + " eigenvalue corollary holds");
    res.summary.push_back(std::to_string(loewner_ok) + of + " direct Loewner cap*T - T_w >= 0 (diagnostic)");

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    res.report = json{{"n", n},
                      {"b", b},
                      {"fit_window", {lo, hi}},
                      {"b_hat_T", b_T},
                      {"lambda_max", lmax},
                      {"worst_delta", worst_delta},
                      {"worst_eig_ratio", worst_ratio},
                      {"worst_min_gap_over_lambda_max", worst_gap},
                      {"worst_transported_min_gap_over_lambda_max", worst_tgap},
                      {"identity_max_entry_diff", id_entry},
                      {"identity_max_eig_rel_diff", id_eig},
                      {"trials", trials},
                      {"seconds", seconds}};

    std::ostringstream text;
    text << "verify-exponent  n=" << n << " b=" << format_double(b) << " trials=" << N << " fit k in [" << lo << ", "
         << hi << "]\n";
    text << "b_hat(T) = " << format_double(b_T) << "   worst |b_hat(T_w) - b_hat(T)| = " << format_double(worst_delta)
         << "\n\n";
    text << checks_text(res.checks);
    res.report_text = text.str();
    return res;
}

SuiteResult run_dynamics(const ExperimentConfig& cfg)
{
    std::map<std::string, Trajectory> trajs;
    SuiteResult res;
    res.mode = cfg.mode;
    json traj_meta = json::object();
    for (const auto& tag : cfg.policies) {
        const SimConfig sc = sim_config(cfg, tag);
        Trajectory tr = run(sc);
        tr.policy = tag;
        res.files.push_back({"trajectory_" + tag + ".csv", trajectory_csv(tr)});
        res.files.push_back({"trajectory_" + tag + ".json", trajectory_json(tr, sc).dump(2) + "\n"});
        traj_meta[tag] = json{{"records", tr.records.size()},
                              {"completed_at", tr.completed_at ? json(*tr.completed_at) : json(nullptr)}};
        trajs.emplace(tag, std::move(tr));
    }

    ReportOptions opts;
    if (cfg.window) opts.window = Window{cfg.window->first, cfg.window->second};
    opts.boost_K0 = cfg.K0.value_or(0);
    const ExponentReport rep = build_report(trajs, ModelParams{*cfg.a, *cfg.b, cfg.p, cfg.q}, opts);

    res.checks = rep.checks;
    res.report = report_json(rep);
    res.report["trajectories"] = traj_meta;
    res.report_text = report_text(rep);
    for (const auto& [tag, pr] : rep.policies) {
        res.summary.push_back(tag + ": frontier exponent " + format_double(pr.fits.frontier.exponent)
                              + ", loss exponent " + format_double(pr.fits.loss.exponent));
    }
    return res;
}

SuiteResult run_span_test(const ExperimentConfig& cfg)
{
    std::ostringstream csv;
    csv << "trial,student_rank,self_rank_min,self_rank_max,teacher_rank_after\n";
    std::size_t self_ok = 0;
    std::size_t teacher_ok = 0;
    std::size_t student_rank = 0;
    std::size_t teacher_min = std::numeric_limits<std::size_t>::max();
    json trials = json::array();
    for (std::size_t i = 0; i < cfg.span_trials; ++i) {
        Rng rng = make_rng(cfg.seed, "span/" + std::to_string(i));
        const std::uint64_t s_student = rng();
        const std::uint64_t s_self = rng();
        const std::uint64_t s_teacher = rng();
        const std::uint64_t s_aug = rng();

        const FeatureSpan F = random_feature_span(cfg.m, cfg.d, cfg.student_rank, s_student);
        const std::size_t r0 = span_rank(F);
        student_rank = r0;
        FeatureSpan G = F;
        std::size_t rmin = r0;
        std::size_t rmax = r0;
        for (std::size_t j = 0; j < cfg.self_count; ++j) {
            G = augment_span(G, SelfGenerator{}, 1, s_self + j);
            const std::size_t r = span_rank(G);
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        const FeatureSpan teacher = random_feature_span(cfg.m, cfg.d, cfg.teacher_rank, s_teacher);
        const std::size_t rt = span_rank(augment_span(F, teacher, cfg.teacher_count, s_aug));

        self_ok += rmin == r0 && rmax == r0;
        teacher_ok += rt > r0;
        teacher_min = std::min(teacher_min, rt);
        csv << i << ',' << r0 << ',' << rmin << ',' << rmax << ',' << rt << '\n';
        trials.push_back(json{{"trial", i}, {"student_rank", r0}, {"self_rank_min", rmin}, {"self_rank_max", rmax},
                              {"teacher_rank_after", rt}});
    }
    const std::size_t N = cfg.span_trials;
    const std::string of = "/" + std::to_string(N);
    SuiteResult res;
    res.mode = cfg.mode;
    res.checks.push_back(check("self augmentation never changes span_rank",
                               std::to_string(self_ok) + of + " trials, " + std::to_string(cfg.self_count)
                                   + " augmentations each",
                               static_cast<double>(self_ok), self_ok == N));
    res.checks.push_back(check("teacher augmentation increases span_rank", std::to_string(teacher_ok) + of + " trials",
                               static_cast<double>(teacher_ok), teacher_ok == N));
    res.files.push_back({"span.csv", csv.str()});
    res.summary.push_back("rank " + std::to_string(student_rank) + " -> " + std::to_string(student_rank) + " (self), "
                          + (self_ok == N ? "PASS" : "FAIL"));
    res.summary.push_back("rank " + std::to_string(student_rank) + " -> >" + std::to_string(student_rank)
                          + " (teacher, min " + std::to_string(teacher_min) + "), " + (teacher_ok == N ? "PASS" : "FAIL"));
    res.report = json{{"d", cfg.d},
                      {"m", cfg.m},
                      {"student_rank", cfg.student_rank},
                      {"teacher_rank", cfg.teacher_rank},
                      {"self_count", cfg.self_count},
                      {"teacher_count", cfg.teacher_count},
                      {"trials", trials}};
    std::ostringstream text;
    text << "span-test  d=" << cfg.d << " m=" << cfg.m << " student rank " << cfg.student_rank << ", teacher rank "
         << cfg.teacher_rank << "\n";
    for (const auto& line : res.summary) text << line << "\n";
    text << "\n" << checks_text(res.checks);
    res.report_text = text.str();
    return res;
}

}  // namespace

bool SuiteResult::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.declared || c.passed; });
}

std::size_t SuiteResult::declared_count() const
{
    return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.declared; }));
}

std::size_t SuiteResult::passed_count() const
{
    return static_cast<std::size_t>(
        std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.declared && c.passed; }));
}

SamplerPolicy make_policy(const std::string& tag, const ExperimentConfig& cfg, std::size_t K)
{
    EvolutionKernel student{cfg.C_beta, cfg.p, cfg.q, cfg.kappa, cfg.regime};
    if (tag == "uniform") return uniform_policy(K);
    if (tag == "static") {
        if (!cfg.cap) throw std::invalid_argument("cap: required by the static policy");
        Rng rng = make_rng(cfg.seed, "static-weights");
        const double cap = draw_cap(*cfg.cap, rng);
        const SamplingWeights w = random_bounded_weights(K, cap, rng);
        return Static{std::vector<double>(w.values().begin(), w.values().end())};
    }
    if (tag == "boost") return StaticBoost{cfg.K0.value_or(0), cfg.boost.value_or(1.0)};
    if (tag == "oracle") return Oracle{cfg.kappa};
    if (tag == "probe") {
        EvolutionKernel probe = student;
        probe.C_beta *= cfg.probe_rate;
        return OnlineProbe{probe, cfg.sharpness};
    }
    if (tag == "self-scoring") return SelfScoring{cfg.gamma};
    if (tag == "ensemble") {
        Ensemble e;
        for (double r : cfg.teacher_rates) {
            EvolutionKernel t = student;
            t.C_beta *= r;
            e.teachers.push_back(t);
        }
        return e;
    }
    if (tag == "synthetic-self") return Synthetic{SyntheticSource::self, 0, cfg.mix};
    if (tag == "synthetic-teacher") return Synthetic{SyntheticSource::teacher, cfg.teacher_K.value_or(0), cfg.mix};
    throw std::invalid_argument("policies: unknown policy '" + tag + "'");
}

SimConfig sim_config(const ExperimentConfig& cfg, const std::string& tag)
{
    if (!cfg.a || !cfg.b || !cfg.K || !cfg.t_start || !cfg.t_end) {
        throw std::invalid_argument("sim_config: a, b, K, t_start and t_end are required");
    }
    const std::size_t K = *cfg.K;
    return SimConfig{make_spectrum(*cfg.b, cfg.C0, K),
                     make_targets(*cfg.a, K),
                     EvolutionKernel{cfg.C_beta, cfg.p, cfg.q, cfg.kappa, cfg.regime},
                     make_policy(tag, cfg, K),
                     *cfg.t_start,
                     *cfg.t_end,
                     cfg.steps_per_decade,
                     cfg.seed,
                     cfg.tail,
                     cfg.warm_up};
}

json sim_config_json(const SimConfig& sc)
{
    return json{{"b", sc.spec.b()},
                {"C0", sc.spec.C0()},
                {"K", sc.spec.size()},
                {"a", sc.targets.a()},
                {"kernel",
                 {{"C_beta", sc.ek.C_beta},
                  {"p", sc.ek.p},
                  {"q", sc.ek.q},
                  {"kappa", sc.ek.kappa},
                  {"regime", sc.ek.regime_label}}},
                {"policy", policy_json(sc.policy)},
                {"t_start", sc.t_start},
                {"t_end", sc.t_end},
                {"steps_per_decade", sc.steps_per_decade},
                {"seed", sc.seed},
                {"tail_model", tail_model_name(sc.tail)},
                {"warm_up", sc.warm_up}};
}

json trajectory_json(const Trajectory& traj, const SimConfig& sc)
{
    json records = json::array();
    for (const auto& r : traj.records) {
        records.push_back(json{{"t", r.t},
                               {"k_star", r.k_star},
                               {"loss", r.loss},
                               {"C_t", r.C_t ? json(*r.C_t) : json(nullptr)},
                               {"entropy", r.entropy},
                               {"frontier_loss", r.frontier_loss},
                               {"gain", r.gain}});
    }
    return json{{"policy", traj.policy},
                {"config", sim_config_json(sc)},
                {"completed_at", traj.completed_at ? json(*traj.completed_at) : json(nullptr)},
                {"records", records}};
}

json report_json(const ExponentReport& rep)
{
    json policies = json::object();
    for (const auto& [name, pr] : rep.policies) {
        json p{{"frontier_fit", fit_json(pr.fits.frontier)},
               {"loss_fit", fit_json(pr.fits.loss)},
               {"final_k_star", pr.final_k_star},
               {"completed_at", pr.completed_at ? json(*pr.completed_at) : json(nullptr)}};
        if (pr.fits.exact_loss) p["exact_loss_fit"] = fit_json(*pr.fits.exact_loss);
        if (pr.predicted_frontier) p["predicted_frontier"] = *pr.predicted_frontier;
        if (pr.predicted_loss) p["predicted_loss"] = *pr.predicted_loss;
        policies[name] = p;
    }
    json j{{"window", {rep.window.lo, rep.window.hi}},
           {"params", {{"a", rep.params.a}, {"b", rep.params.b}, {"p", rep.params.p}, {"q", rep.params.q}}},
           {"predictions",
            {{"rho", rep.predictions.rho},
             {"static_frontier", rep.predictions.static_frontier},
             {"oracle_frontier", rep.predictions.oracle_frontier},
             {"static_loss", rep.predictions.static_loss},
             {"oracle_loss", rep.predictions.oracle_loss}}},
           {"tolerances",
            {{"frontier", rep.tolerances.frontier},
             {"loss", rep.tolerances.loss},
             {"ordering", rep.tolerances.ordering},
             {"boost_ratio", rep.tolerances.boost_ratio},
             {"crossover", rep.tolerances.crossover}}},
           {"policies", policies},
           {"checks", checks_json(rep.checks)},
           {"all_passed", rep.all_passed()}};
    if (rep.boost) {
        const auto& b = *rep.boost;
        j["boost"] = json{{"K0", b.K0},
                          {"min_ratio_inside", b.min_ratio_inside},
                          {"inside_points", b.inside_points},
                          {"late_window", {b.late_window.lo, b.late_window.hi}},
                          {"late_exponent_boost", b.late_exponent_boost},
                          {"late_exponent_uniform", b.late_exponent_uniform},
                          {"late_ratio_limit", b.late_ratio_limit},
                          {"crossover_time", b.crossover_time ? json(*b.crossover_time) : json(nullptr)}};
    }
    return j;
}

SuiteResult run_suite(const ExperimentConfig& cfg)
{
    validate_config(cfg);
    SuiteResult res;
    switch (cfg.mode) {
    case Mode::verify_exponent: res = run_verify_exponent(cfg); break;
    case Mode::simulate:
    case Mode::compare: res = run_dynamics(cfg); break;
    case Mode::span_test: res = run_span_test(cfg); break;
    }
    res.report["mode"] = mode_name(cfg.mode);
    res.report["name"] = cfg.name;
    if (!res.report.contains("checks")) res.report["checks"] = checks_json(res.checks);
    res.report["all_passed"] = res.all_passed();
    return res;
}

}  // namespace specdyn
