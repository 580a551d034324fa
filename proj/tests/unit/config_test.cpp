#include <doctest.h>

#include <filesystem>
#include <string>

#include "specdyn/config.hpp"
#include "specdyn/text_io.hpp"

using namespace specdyn;

namespace {

const std::string kMinimal =
    "mode = simulate\nb = 2\na = 2\nK = 10000\nt_start = 100\nt_end = 1e6\npolicy = oracle\n";

std::size_t error_line(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    FAIL("expected a ConfigError");
    return 0;
}

std::string error_text(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    FAIL("expected a ConfigError");
    return {};
}

}  // namespace

TEST_CASE("minimal simulate document gets defaults")
{
    const auto cfg = parse_config(kMinimal);
    CHECK(cfg.mode == Mode::simulate);
    CHECK(cfg.policies == std::vector<std::string>{"oracle"});
    CHECK(cfg.kappa == 1.0);
    CHECK(cfg.C_beta == 1.0);
    CHECK(cfg.steps_per_decade == 32);
    CHECK(cfg.tail == TailModel::remainder);
    CHECK(cfg.name == "experiment");
}

TEST_CASE("verify-exponent defaults to 20 trials")
{
    const auto cfg = parse_config("mode = verify-exponent\nn = 1024\nb = 2\ncap = 4\nseed = 7\n");
    CHECK(cfg.trials == 20);
    REQUIRE(cfg.cap);
    CHECK(cfg.cap->first == 4.0);
    CHECK(cfg.cap->second == 4.0);
    CHECK(cfg.seed == 7);
}

TEST_CASE("validation errors name the key and constraint")
{
    const std::string msg = error_text("mode = simulate\nb = 0.9\na = 2\nK = 10000\nt_start = 100\nt_end = 1e6\n"
                                       "policy = uniform\n");
    CHECK(msg.find("b") != std::string::npos);
    CHECK(msg.find("> 1") != std::string::npos);

    CHECK(error_text("mode = simulate\nb = 2\na = 2\nK = 100\nt_start = 100\nt_end = 1e6\npolicy = uniform\n")
              .find("K") != std::string::npos);
    CHECK(error_text("mode = verify-exponent\nn = 32\nb = 2\ncap = 4\n").find("n") != std::string::npos);
    CHECK(error_text("b = 2\n").find("mode") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers")
{
    CHECK(error_line("mode = simulate\n# comment\nnonsense\n") == 3);
    CHECK(error_line("mode = simulate\nwhatever = 3\n") == 2);
    CHECK(error_line("mode = simulate\nb = 2\nb = 3\n") == 3);
    CHECK(error_line("mode = simulate\npolicy = uniform\npolicies = oracle\n") == 3);
    CHECK(error_line("mode = simulate\nb = two\n") == 2);
    CHECK(error_line("[a]\n[b]\n") == 2);
    CHECK(error_line("mode = simulate\n[late]\n") == 2);
    CHECK(error_line("mode = teleport\n") == 1);
    CHECK(error_line("mode = simulate\nb =\n") == 2);
    CHECK(error_text("mode = simulate\nb = two\n").rfind("line 2: ", 0) == 0);
}

TEST_CASE("unknown policy tags are rejected")
{
    CHECK_THROWS_AS(parse_config("mode = compare\nb = 2\na = 2\nK = 10000\nt_start = 100\nt_end = 1e6\n"
                                 "policies = uniform, psychic\n"),
                    ConfigError);
}

TEST_CASE("print_config round trips")
{
    auto cfg = parse_config(kMinimal);
    CHECK(parse_config(print_config(cfg)) == cfg);

    cfg = parse_config("[full]\nmode = compare\na = 2.5\nb = 1.5\nK = 200000\nC0 = 3\np = 1.5\nq = 0.75\n"
                       "kappa = 0.5\nC_beta = 2\nt_start = 10\nt_end = 1e5\nsteps_per_decade = 24\n"
                       "policies = uniform, boost, synthetic-teacher, ensemble\nwindow = 100, 10000\n"
                       "tail_model = truncated\nwarm_up = false\nK0 = 40\nboost = 3\nteacher_K = 500\n"
                       "teacher_rates = 0.25, 8\nmix = 0.3\nseed = 99\noutput_dir = /tmp/x\n");
    CHECK(cfg.name == "full");
    CHECK(cfg.tail == TailModel::truncated);
    CHECK_FALSE(cfg.warm_up);
    CHECK(cfg.teacher_rates == std::vector<double>{0.25, 8.0});
    const std::string printed = print_config(cfg);
    CHECK(parse_config(printed) == cfg);
    CHECK(print_config(parse_config(printed)) == printed);
}

TEST_CASE("shipped configs parse and round trip")
{
    const std::filesystem::path dir = SPECDYN_CONFIG_DIR;
    std::size_t count = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".cfg") continue;
        ++count;
        CAPTURE(e.path().string());
        const auto cfg = parse_config(read_file(e.path()));
        CHECK(cfg.name == e.path().stem().string());
        CHECK(parse_config(print_config(cfg)) == cfg);
    }
    CHECK(count >= 9);
}
