#include "specdyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "specdyn/dynamics.hpp"
#include "specdyn/text_io.hpp"

namespace specdyn {

namespace {

std::string trim(const std::string& s)
{
    const auto lo = s.find_first_not_of(" \t\r");
    if (lo == std::string::npos) return {};
    const auto hi = s.find_last_not_of(" \t\r");
    return s.substr(lo, hi - lo + 1);
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw std::invalid_argument("empty list item");
        items.push_back(item);
    }
    if (items.empty()) throw std::invalid_argument("empty list");
    return items;
}

double to_real(const std::string& v)
{
    const double x = parse_double(v);
    if (!std::isfinite(x)) throw std::invalid_argument("value must be finite");
    return x;
}

std::uint64_t to_count(const std::string& v)
{
    const double x = to_real(v);
    if (x < 0.0 || x != std::floor(x) || x > 9.0e15) {
        throw std::invalid_argument("expected a nonnegative integer, got '" + v + "'");
    }
    return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& v)
{
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::pair<double, double> to_range(const std::string& v)
{
    const auto items = split_list(v);
    if (items.size() == 1) {
        const double x = to_real(items[0]);
        return {x, x};
    }
    if (items.size() == 2) return {to_real(items[0]), to_real(items[1])};
    throw std::invalid_argument("expected one value or a 'lo, hi' pair");
}

Mode to_mode(const std::string& v)
{
    if (v == "verify-exponent") return Mode::verify_exponent;
    if (v == "simulate") return Mode::simulate;
    if (v == "compare") return Mode::compare;
    if (v == "span-test") return Mode::span_test;
    throw std::invalid_argument("unknown mode '" + v + "' (verify-exponent, simulate, compare, span-test)");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"mode", [](auto& c, const auto& v) { c.mode = to_mode(v); }},
        {"a", [](auto& c, const auto& v) { c.a = to_real(v); }},
        {"b", [](auto& c, const auto& v) { c.b = to_real(v); }},
        {"C0", [](auto& c, const auto& v) { c.C0 = to_real(v); }},
        {"p", [](auto& c, const auto& v) { c.p = to_real(v); }},
        {"q", [](auto& c, const auto& v) { c.q = to_real(v); }},
        {"kappa", [](auto& c, const auto& v) { c.kappa = to_real(v); }},
        {"C_beta", [](auto& c, const auto& v) { c.C_beta = to_real(v); }},
        {"regime", [](auto& c, const auto& v) { c.regime = v; }},
        {"K", [](auto& c, const auto& v) { c.K = to_count(v); }},
        {"n", [](auto& c, const auto& v) { c.n = to_count(v); }},
        {"trials", [](auto& c, const auto& v) { c.trials = to_count(v); }},
        {"cap", [](auto& c, const auto& v) { c.cap = to_range(v); }},
        {"t_start", [](auto& c, const auto& v) { c.t_start = to_real(v); }},
        {"t_end", [](auto& c, const auto& v) { c.t_end = to_real(v); }},
        {"steps_per_decade", [](auto& c, const auto& v) { c.steps_per_decade = static_cast<int>(to_count(v)); }},
        {"policies", [](auto& c, const auto& v) { c.policies = split_list(v); }},
        {"policy", [](auto& c, const auto& v) { c.policies = {trim(v)}; }},
        {"window",
         [](auto& c, const auto& v) {
             const auto r = to_range(v);
             if (r.first == r.second) throw std::invalid_argument("window needs 'lo, hi'");
             c.window = r;
         }},
        {"tail_model", [](auto& c, const auto& v) { c.tail = parse_tail_model(v); }},
        {"warm_up", [](auto& c, const auto& v) { c.warm_up = to_bool(v); }},
        {"K0", [](auto& c, const auto& v) { c.K0 = to_count(v); }},
        {"boost", [](auto& c, const auto& v) { c.boost = to_real(v); }},
        {"gamma", [](auto& c, const auto& v) { c.gamma = to_real(v); }},
        {"sharpness", [](auto& c, const auto& v) { c.sharpness = to_real(v); }},
        {"probe_rate", [](auto& c, const auto& v) { c.probe_rate = to_real(v); }},
        {"teacher_rates",
         [](auto& c, const auto& v) {
             c.teacher_rates.clear();
             for (const auto& item : split_list(v)) c.teacher_rates.push_back(to_real(item));
         }},
        {"mix", [](auto& c, const auto& v) { c.mix = to_real(v); }},
        {"teacher_K", [](auto& c, const auto& v) { c.teacher_K = to_count(v); }},
        {"d", [](auto& c, const auto& v) { c.d = to_count(v); }},
        {"m", [](auto& c, const auto& v) { c.m = to_count(v); }},
        {"student_rank", [](auto& c, const auto& v) { c.student_rank = to_count(v); }},
        {"teacher_rank", [](auto& c, const auto& v) { c.teacher_rank = to_count(v); }},
        {"self_count", [](auto& c, const auto& v) { c.self_count = to_count(v); }},
        {"teacher_count", [](auto& c, const auto& v) { c.teacher_count = to_count(v); }},
        {"span_trials", [](auto& c, const auto& v) { c.span_trials = to_count(v); }},
        {"seed", [](auto& c, const auto& v) { c.seed = to_count(v); }},
        {"output_dir", [](auto& c, const auto& v) { c.output_dir = v; }},
    };
    return table;
}

[[noreturn]] void bad(const std::string& key, const std::string& constraint)
{
    throw ConfigError(0, key + ": " + constraint);
}

void need(bool ok, const std::string& key, const std::string& constraint)
{
    if (!ok) bad(key, constraint);
}

template <class T>
const T& required(const std::optional<T>& v, const std::string& key, Mode mode)
{
    if (!v) bad(key, "required in mode " + mode_name(mode));
    return *v;
}

bool uses(const ExperimentConfig& c, const std::string& tag)
{
    return std::find(c.policies.begin(), c.policies.end(), tag) != c.policies.end();
}

void validate_cap(const ExperimentConfig& c)
{
    const auto& cap = required(c.cap, "cap", c.mode);
    need(cap.first >= 1.0, "cap", "must be >= 1 (weights have mean 1)");
    need(cap.second >= cap.first, "cap", "range must satisfy lo <= hi");
}

void validate_dynamics(const ExperimentConfig& c)
{
    const double a = required(c.a, "a", c.mode);
    const double b = required(c.b, "b", c.mode);
    need(a > 1.0, "a", "must be > 1");
    need(b > 1.0, "b", "must be > 1 (tail sum diverges otherwise)");
    const std::size_t K = required(c.K, "K", c.mode);
    need(K >= 2, "K", "must be >= 2");
    const double t0 = required(c.t_start, "t_start", c.mode);
    const double t1 = required(c.t_end, "t_end", c.mode);
    need(t0 > 0.0, "t_start", "must be > 0");
    need(t1 > t0, "t_end", "must be > t_start");
    need(c.steps_per_decade >= 16, "steps_per_decade", "must be >= 16");
    const double tail = power_tail_sum(a, K + 1);
    need(tail < 1e-3 * power_tail_sum(a, 1), "K",
         "too small: truncated tail loss " + format_double(tail) + " is not below 1e-3 of L(0)");

    need(!c.policies.empty(), "policies", "at least one policy is required");
    if (c.mode == Mode::simulate) need(c.policies.size() == 1, "policy", "simulate runs exactly one policy");
    std::set<std::string> seen;
    for (const auto& tag : c.policies) {
        need(std::find(policy_tags().begin(), policy_tags().end(), tag) != policy_tags().end(), "policies",
             "unknown policy '" + tag + "'");
        need(seen.insert(tag).second, "policies", "duplicate policy '" + tag + "'");
    }
    if (c.window) {
        need(c.window->first > 0.0 && c.window->second > c.window->first, "window", "must satisfy 0 < lo < hi");
    }
    if (uses(c, "static")) validate_cap(c);
    if (uses(c, "boost")) {
        const std::size_t K0 = required(c.K0, "K0", c.mode);
        need(K0 >= 1 && K0 <= K, "K0", "must be in [1, K]");
        need(required(c.boost, "boost", c.mode) > 1.0, "boost", "must be > 1");
    }
    if (uses(c, "probe")) {
        need(c.probe_rate > 0.0, "probe_rate", "must be > 0");
        need(c.sharpness >= 0.0, "sharpness", "must be >= 0");
    }
    if (uses(c, "self-scoring")) need(c.gamma >= 0.0, "gamma", "must be >= 0");
    if (uses(c, "ensemble")) {
        need(c.teacher_rates.size() >= 2, "teacher_rates", "needs at least two teachers");
        for (double r : c.teacher_rates) need(r > 0.0, "teacher_rates", "every rate must be > 0");
    }
    if (uses(c, "synthetic-self") || uses(c, "synthetic-teacher")) {
        need(c.mix >= 0.0 && c.mix <= 1.0, "mix", "must be in [0, 1]");
    }
    if (uses(c, "synthetic-teacher")) {
        const std::size_t tk = required(c.teacher_K, "teacher_K", c.mode);
        need(tk >= 1 && tk <= K, "teacher_K", "must be in [1, K]");
    }
}

std::string range_text(const std::pair<double, double>& r)
{
    if (r.first == r.second) return format_double(r.first);
    return format_double(r.first) + ", " + format_double(r.second);
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : std::invalid_argument(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
{
}

std::string mode_name(Mode m)
{
    switch (m) {
    case Mode::verify_exponent: return "verify-exponent";
    case Mode::simulate: return "simulate";
    case Mode::compare: return "compare";
    case Mode::span_test: return "span-test";
    }
    return "?";
}

void validate_config(const ExperimentConfig& c)
{
    need(!c.name.empty(), "name", "must not be empty");
    need(c.C0 > 0.0, "C0", "must be > 0");
    need(c.p > 0.0, "p", "must be > 0");
    need(c.q > 0.0, "q", "must be > 0");
    need(c.kappa > 0.0, "kappa", "must be > 0");
    need(c.C_beta > 0.0, "C_beta", "must be > 0");

    switch (c.mode) {
    case Mode::verify_exponent: {
        const double b = required(c.b, "b", c.mode);
        need(b > 1.0, "b", "must be > 1 (tail sum diverges otherwise)");
        const std::size_t n = required(c.n, "n", c.mode);
        need(n >= 64, "n", "must be >= 64 (fit window k in [n/32, n/2])");
        need(n <= 4096, "n", "must be <= 4096");
        if (c.K) need(*c.K >= n, "K", "must be >= n");
        need(c.trials >= 1, "trials", "must be >= 1");
        validate_cap(c);
        break;
    }
    case Mode::simulate:
    case Mode::compare: validate_dynamics(c); break;
    case Mode::span_test: {
        need(c.d >= 1, "d", "must be >= 1");
        need(c.m >= 1, "m", "must be >= 1");
        const std::size_t top = std::min(c.m, c.d);
        need(c.student_rank >= 1 && c.student_rank <= top, "student_rank", "must be in [1, min(m, d)]");
        need(c.teacher_rank >= 1 && c.teacher_rank <= top, "teacher_rank", "must be in [1, min(m, d)]");
        need(c.span_trials >= 1, "span_trials", "must be >= 1");
        break;
    }
    }
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig cfg;
    std::set<std::string> seen;
    bool named = false;
    bool has_mode = false;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) throw ConfigError(line_no, "malformed section header");
            if (named) throw ConfigError(line_no, "only one [name] section is allowed");
            if (!seen.empty()) throw ConfigError(line_no, "the [name] section must come before any key");
            cfg.name = trim(line.substr(1, line.size() - 2));
            if (cfg.name.empty()) throw ConfigError(line_no, "empty section name");
            named = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(line_no, "missing key before '='");
        if (value.empty()) throw ConfigError(line_no, key + ": missing value");
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(line_no, "unknown key '" + key + "'");
        const std::string slot = key == "policy" ? "policies" : key;
        if (!seen.insert(slot).second) throw ConfigError(line_no, key + ": set more than once");
        try {
            it->second(cfg, value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(line_no, key + ": " + e.what());
        }
        has_mode = has_mode || key == "mode";
    }
    if (!has_mode) throw ConfigError(0, "mode: required");
    validate_config(cfg);
    return cfg;
}

std::string print_config(const ExperimentConfig& c)
{
    std::ostringstream out;
    auto kv = [&](const std::string& k, const std::string& v) { out << k << " = " << v << '\n'; };
    auto num = [&](const std::string& k, double v) { kv(k, format_double(v)); };
    auto count = [&](const std::string& k, std::uint64_t v) { kv(k, std::to_string(v)); };
    auto join = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& x : items) s += (s.empty() ? "" : ", ") + fmt(x);
        return s;
    };

    out << '[' << c.name << "]\n";
    kv("mode", mode_name(c.mode));
    if (c.a) num("a", *c.a);
    if (c.b) num("b", *c.b);
    num("C0", c.C0);
    num("p", c.p);
    num("q", c.q);
    num("kappa", c.kappa);
    num("C_beta", c.C_beta);
    kv("regime", c.regime);
    if (c.K) count("K", *c.K);
    if (c.n) count("n", *c.n);
    count("trials", c.trials);
    if (c.cap) kv("cap", range_text(*c.cap));
    if (c.t_start) num("t_start", *c.t_start);
    if (c.t_end) num("t_end", *c.t_end);
    count("steps_per_decade", static_cast<std::uint64_t>(c.steps_per_decade));
    if (!c.policies.empty()) kv("policies", join(c.policies, [](const std::string& s) { return s; }));
    if (c.window) kv("window", range_text(*c.window));
    kv("tail_model", tail_model_name(c.tail));
    kv("warm_up", c.warm_up ? "true" : "false");
    if (c.K0) count("K0", *c.K0);
    if (c.boost) num("boost", *c.boost);
    num("gamma", c.gamma);
    num("sharpness", c.sharpness);
    num("probe_rate", c.probe_rate);
    kv("teacher_rates", join(c.teacher_rates, [](double x) { return format_double(x); }));
    num("mix", c.mix);
    if (c.teacher_K) count("teacher_K", *c.teacher_K);
    count("d", c.d);
    count("m", c.m);
    count("student_rank", c.student_rank);
    count("teacher_rank", c.teacher_rank);
    count("self_count", c.self_count);
    count("teacher_count", c.teacher_count);
    count("span_trials", c.span_trials);
    count("seed", c.seed);
    if (c.output_dir) kv("output_dir", *c.output_dir);
    return out.str();
}

}  // namespace specdyn
