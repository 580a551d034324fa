#include "specdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "specdyn/text_io.hpp"

namespace specdyn {

namespace {

void advance_in_place(ModeState& st, double t_next, std::span<const double> omega,
                      const PowerLawSpectrum& spec, const EvolutionKernel& ek)
{
    const std::size_t K = spec.size();
    if (st.G.size() != K || st.exposure.size() != K || omega.size() != K) {
        throw std::invalid_argument("advance: state, weights and spectrum differ in K");
    }
    if (!(t_next > st.t) || !std::isfinite(t_next)) {
        throw std::invalid_argument("advance: t_next must exceed the current time");
    }
    const double dtq = std::pow(t_next, ek.q) - std::pow(st.t, ek.q);
    const double dt = t_next - st.t;
    const bool linear = ek.p == 1.0;
    for (std::size_t i = 0; i < K; ++i) {
        const double w = omega[i];
        if (!(w >= 0.0)) {
            throw std::invalid_argument("advance: weights must be >= 0");
        }
        if (w == 0.0) continue;
        const double eff = w * spec[i];
        st.G[i] += ek.C_beta * (linear ? eff : std::pow(eff, ek.p)) * dtq;
        st.exposure[i] += w * dt;
    }
    const double w_tail = omega[K - 1];
    if (w_tail > 0.0) st.tail_progress += ek.C_beta * (linear ? w_tail : std::pow(w_tail, ek.p)) * dtq;
    st.t = t_next;
}

}  // namespace

void SimConfig::validate() const
{
    const std::size_t K = spec.size();
    if (targets.size() != K) {
        throw std::invalid_argument("SimConfig: spectrum and targets differ in K");
    }
    ek.validate();
    validate_policy(policy, K);
    if (!(t_start > 0.0) || !std::isfinite(t_start)) {
        throw std::invalid_argument("SimConfig: t_start must be > 0");
    }
    if (!(t_end > t_start) || !std::isfinite(t_end)) {
        throw std::invalid_argument("SimConfig: t_end must be > t_start");
    }
    if (steps_per_decade < 16) {
        throw std::invalid_argument("SimConfig: steps_per_decade must be >= 16");
    }
    const double full_loss = targets.initial_loss() + targets.remainder_loss();
    if (!(targets.remainder_loss() < 1e-3 * full_loss)) {
        throw std::invalid_argument("SimConfig: K too small, truncated tail loss "
                                    + format_double(targets.remainder_loss()) + " is not below 1e-3 of L(0)");
    }
}

std::vector<double> Trajectory::times() const
{
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(r.t);
    return v;
}

std::vector<double> Trajectory::frontiers() const
{
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(static_cast<double>(r.k_star));
    return v;
}

std::vector<double> Trajectory::losses() const
{
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(r.loss);
    return v;
}

std::vector<double> Trajectory::frontier_losses() const
{
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(r.frontier_loss);
    return v;
}

ModeState advance(const ModeState& state, double t_next, std::span<const double> omega,
                  const PowerLawSpectrum& spec, const EvolutionKernel& ek)
{
    ModeState next = state;
    advance_in_place(next, t_next, omega, spec, ek);
    return next;
}

double loss_of(const ModeState& state, const TargetCoefficients& targets)
{
    if (state.G.size() != targets.size()) {
        throw std::invalid_argument("loss_of: state and targets differ in K");
    }
    double loss = 0.0;
    for (std::size_t i = targets.size(); i > 0; --i) loss += targets[i - 1] * std::exp(-2.0 * state.G[i - 1]);
    return loss;
}

double reservoir_residual(double B, const PowerLawSpectrum& spec, const TargetCoefficients& targets,
                          const EvolutionKernel& ek)
{
    if (!(B >= 0.0)) {
        throw std::invalid_argument("reservoir_residual: progress must be >= 0");
    }
    if (B == 0.0) return targets.remainder_loss();
    const double a = targets.a();
    const double alpha = spec.b() * ek.p / (a - 1.0);
    const double c = 2.0 * B * std::pow(spec.C0(), ek.p);
    const double V = std::pow(static_cast<double>(spec.size()) + 0.5, 1.0 - a);
    const double s = 1.0 / alpha;
    const double integral = std::pow(c, -s) / alpha * boost::math::tgamma_lower(s, c * std::pow(V, alpha));
    return targets.remainder_loss() * (integral / V);
}

std::vector<double> time_grid(const SimConfig& cfg)
{
    const double span = std::log(cfg.t_end / cfg.t_start);
    const double decades = span / std::log(10.0);
    const long N = std::max(1L, std::lround(decades * cfg.steps_per_decade));
    const double step = span / static_cast<double>(N);

    std::vector<double> grid;
    if (cfg.warm_up) {
        const double lambda1 = cfg.spec[0];
        const double t_on =
            std::pow(cfg.ek.kappa / (cfg.ek.C_beta * std::pow(lambda1, cfg.ek.p)), 1.0 / cfg.ek.q);
        if (t_on < cfg.t_start) {
            const double need = std::log(cfg.t_start / t_on) / step;
            const long m = std::min<long>(static_cast<long>(std::ceil(need - 1e-9)), 64L * cfg.steps_per_decade);
            for (long j = m; j >= 1; --j) grid.push_back(cfg.t_start * std::exp(-static_cast<double>(j) * step));
        }
    }
    grid.push_back(cfg.t_start);
    for (long i = 1; i < N; ++i) grid.push_back(cfg.t_start * std::exp(static_cast<double>(i) * step));
    grid.push_back(cfg.t_end);
    return grid;
}

Trajectory run(const SimConfig& cfg)
{
    cfg.validate();
    const std::size_t K = cfg.spec.size();
    const SamplerContext ctx{cfg.spec, cfg.targets, cfg.ek, cfg.tail};
    const bool reservoir = cfg.tail == TailModel::remainder;

    Trajectory traj;
    traj.policy = policy_kind(cfg.policy);
    traj.K = K;

    ModeState state = ModeState::initial(K);
    const double record_from = cfg.t_start * (1.0 - 1e-12);
    for (double t_next : time_grid(cfg)) {
        Sampling sampling;
        try {
            sampling = weights_at(cfg.policy, ctx, state);
        } catch (const NothingLeftToLearn&) {
            traj.completed_at = state.t;
            break;
        }
        const std::vector<double> omega = sampling.operator_weights();
        advance_in_place(state, t_next, omega, cfg.spec, cfg.ek);
        if (t_next < record_from) continue;

        TrajectoryRecord rec;
        rec.t = t_next;
        rec.k_star = learned_frontier(state.G, cfg.ek.kappa);
        const double residual =
            reservoir ? reservoir_residual(state.tail_progress, cfg.spec, cfg.targets, cfg.ek) : 0.0;
        double head = 0.0;
        double tail = 0.0;
        for (std::size_t i = K; i > 0; --i) {
            const double term = cfg.targets[i - 1] * std::exp(-2.0 * state.G[i - 1]);
            if (i > rec.k_star) {
                tail += term;
            } else {
                head += term;
            }
        }
        rec.frontier_loss = tail + residual;
        rec.loss = head + rec.frontier_loss;
        if (sampling.oracle) rec.C_t = sampling.oracle->C_t;
        rec.entropy = sampling.entropy;
        rec.gain = sampling.gain;
        traj.records.push_back(rec);
    }
    return traj;
}

std::string trajectory_csv(const Trajectory& traj)
{
    std::ostringstream out;
    out << "t,k_star,loss,C_t,entropy,frontier_loss,gain\n";
    for (const auto& r : traj.records) {
        out << format_double(r.t) << ',' << r.k_star << ',' << format_double(r.loss) << ','
            << (r.C_t ? format_double(*r.C_t) : std::string()) << ',' << format_double(r.entropy) << ','
            << format_double(r.frontier_loss) << ',' << format_double(r.gain) << '\n';
    }
    return out.str();
}

std::string tail_model_name(TailModel tail)
{
    return tail == TailModel::remainder ? "remainder" : "truncated";
}

TailModel parse_tail_model(const std::string& name)
{
    if (name == "remainder") return TailModel::remainder;
    if (name == "truncated") return TailModel::truncated;
    throw std::invalid_argument("unknown tail model '" + name + "' (expected remainder or truncated)");
}

}  // namespace specdyn
