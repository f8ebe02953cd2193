#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "smalldev/csv.hpp"
#include "smalldev/error.hpp"
#include "smalldev/rng.hpp"

using namespace smalldev;

TEST_CASE("doubles survive a text round trip") {
    auto rng = make_stream(1, "csv", 0);
    for (int i = 0; i < 10000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<int>(rng.below(40)) - 20);
        CHECK(parse_double(format_double(x)) == x);
    }
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
    CHECK(parse_double(format_double(-std::numeric_limits<double>::infinity())) < 0);
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
    CHECK_THROWS_AS(parse_double(""), Error);
}

TEST_CASE("writer output reads back") {
    std::ostringstream out;
    Provenance prov{"0.1.0", 7, 0xabcdef};
    {
        CsvWriter csv(out, {"name", "value", "count"}, &prov);
        csv.cell("a").cell(0.1).cell(3).end_row();
        csv.cell("b").cell(-2.5e-300).cell(std::size_t{4}).end_row();
        CHECK_THROWS_AS(csv.cell("short").end_row(), Error);
    }
    const std::string text = out.str();
    CHECK(text.rfind("# smalldev 0.1.0 seed=7 config=0000000000abcdef\n", 0) == 0);
    std::istringstream in(text);
    const CsvTable table = read_csv_table(in);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.comments.size() == 1);
    CHECK(parse_double(table.rows[0][table.column("value")]) == 0.1);
    CHECK(parse_double(table.rows[1][table.column("value")]) == -2.5e-300);
    CHECK_THROWS_AS(table.column("missing"), Error);
}

TEST_CASE("ragged rows are parse errors") {
    std::istringstream in("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv_table(in), Error);
    std::istringstream empty("# only a comment\n");
    CHECK_THROWS_AS(read_csv_table(empty), Error);
}
