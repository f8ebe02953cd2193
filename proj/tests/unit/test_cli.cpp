#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smalldev/cli.hpp"
#include "smalldev/csv.hpp"
#include "smalldev/model_io.hpp"
#include "smalldev/rates.hpp"

using namespace smalldev;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string data(const std::string& name) { return std::string(SMALLDEV_DATA_DIR) + "/" + name; }

std::string body(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        out += line + "\n";
    }
    return out;
}

std::vector<double> numeric(const CsvTable& table, const std::string& name) {
    const auto col = table.column(name);
    std::vector<double> out;
    for (const auto& row : table.rows) out.push_back(parse_double(row[col]));
    return out;
}

std::string first_comment(const std::string& text) { return text.substr(0, text.find('\n')); }

const std::vector<std::string> kExponent{"exponent", "--model", data("pm1.json"), "--n", "400", "--alpha", "0.3",
                                         "--a", "-1", "--b", "1", "--seed", "5"};

}  // namespace

TEST_CASE("identical config and seed give identical output") {
    const auto a = invoke(kExponent);
    const auto b = invoke(kExponent);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    auto threaded = kExponent;
    threaded.insert(threaded.end(), {"--workers", "2"});
    const auto c = invoke(threaded);
    CHECK(body(c.out) == body(a.out));
    CHECK(first_comment(c.out) == first_comment(a.out));
}

TEST_CASE("output carries a provenance line and parses back") {
    const auto r = invoke(kExponent);
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# smalldev 0.1.0 seed=5 config=", 0) == 0);
    std::istringstream in(r.out);
    const auto table = read_csv_table(in);
    CHECK(table.header == std::vector<std::string>{"seed", "n", "log_prob", "exponent"});
    REQUIRE(table.rows.size() == 1);
    const auto logp = numeric(table, "log_prob");
    const auto expo = numeric(table, "exponent");
    CHECK(expo[0] == doctest::Approx(logp[0] / std::pow(400.0, 0.4)));
}

TEST_CASE("config hash tracks semantic fields only") {
    const auto hash = [](std::vector<std::string> args) {
        const auto r = invoke(args);
        REQUIRE(r.code == 0);
        const auto line = first_comment(r.out);
        return line.substr(line.find("config="));
    };
    const auto base = hash(kExponent);
    auto workers = kExponent;
    workers.insert(workers.end(), {"--workers", "3"});
    CHECK(hash(workers) == base);
    auto seed = kExponent;
    seed.back() = "6";
    CHECK(hash(seed) == base);
    auto spelled = kExponent;
    spelled[6] = "0.30";
    CHECK(hash(spelled) == base);
    auto window = kExponent;
    window[10] = "1.5";
    CHECK(hash(window) != base);
    auto length = kExponent;
    length[4] = "401";
    CHECK(hash(length) != base);

    const auto dir = std::filesystem::temp_directory_path() / "smalldev_test_cli";
    std::filesystem::create_directories(dir);
    const auto out = (dir / "x.csv").string();
    auto to_file = kExponent;
    to_file.insert(to_file.end(), {"--out", out});
    REQUIRE(invoke(to_file).code == 0);
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str() == invoke(kExponent).out);
    std::filesystem::remove_all(dir);
}

TEST_CASE("SMALLDEV_SEED overrides --seed") {
    const auto plain = invoke(kExponent);
    auto other = kExponent;
    other.back() = "9";
    ::setenv("SMALLDEV_SEED", "5", 1);
    const auto overridden = invoke(other);
    ::setenv("SMALLDEV_SEED", "junk", 1);
    const auto bad = invoke(other);
    ::unsetenv("SMALLDEV_SEED");
    CHECK(overridden.code == 0);
    CHECK(overridden.out == plain.out);
    CHECK(bad.code == 2);
}

TEST_CASE("validation errors exit 2 and name the flag") {
    auto r = invoke({"predict", "--model", data("pm1.json"), "--a", "-1", "--b", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--gamma-table") != std::string::npos);

    r = invoke({"convergence", "--model", data("pm1.json"), "--a", "-1", "--b", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--n-list") != std::string::npos);

    r = invoke({"exponent", "--model", "/nonexistent/model.json", "--n", "10"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--model") != std::string::npos);

    r = invoke({"exponent", "--model", data("pm1.json"), "--n", "10", "--alpha", "0.7"});
    CHECK(r.code == 2);

    r = invoke({"couple", "--reps", "10"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--reps") != std::string::npos);

    r = invoke({"couple", "--law", "1,0.3,1"});
    CHECK(r.code == 2);

    r = invoke({"bogus"});
    CHECK(r.code == 2);

    r = invoke({"--help"});
    CHECK(r.code == 0);
}

TEST_CASE("couple writes the note and a tail table") {
    const auto r = invoke({"couple", "--n", "20", "--reps", "1000", "--x-grid", "0,1,2", "--seed", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("shape comparison only") != std::string::npos);
    std::istringstream in(r.out);
    const auto table = read_csv_table(in);
    const auto tail = numeric(table, "empirical_tail");
    REQUIRE(tail.size() == 3);
    CHECK(tail[0] == 1.0);
    CHECK(tail[2] <= tail[1]);
}

TEST_CASE("convergence rows carry the relative gap") {
    const auto model = load_model(data("variance_mix.json"));
    ConvergenceOptions opts;
    opts.n_list = {1000, 4000};
    opts.seeds = 2;
    const auto rows = convergence_table(model, BoundarySpec::constant(0.3, -1, 1), opts);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.method == "dp");
        CHECK(row.formula == "mogulskii");
        CHECK(row.predicted == doctest::Approx(mogulskii_rate(1.5, -1, 1)));
        CHECK(row.rel_gap == doctest::Approx((row.exponent - row.predicted) / std::abs(row.predicted)));
        CHECK(std::abs(row.rel_gap) < 0.25);
    }
    CHECK(rows[0].seed == 1);
    CHECK(rows[1].seed == 2);

    const auto r = invoke({"convergence", "--model", data("variance_mix.json"), "--alpha", "0.3", "--a", "-1",
                           "--b", "1", "--n-list", "1000,4000", "--seeds", "2"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    const auto table = read_csv_table(in);
    const auto gaps = numeric(table, "rel_gap");
    REQUIRE(gaps.size() == 4);
    CHECK(gaps[3] == doctest::Approx(rows[3].rel_gap));
}

TEST_CASE("convergence without a gamma table fails when sigma_A > 0") {
    const auto r = invoke({"convergence", "--model", data("epsilon.json"), "--alpha", "0.3", "--a", "-1", "--b",
                           "1", "--n-list", "100"});
    CHECK(r.code == 2);
}
