#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "prognosis/csv.hpp"

using namespace prognosis;

TEST_CASE("csv parses header, rows and quoted fields") {
    const auto t = parse_csv("a,b,c\n1,\"x,y\",3\n4,\"he said \"\"hi\"\"\",6\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[1][1] == "he said \"hi\"");
}

TEST_CASE("csv skips comment lines and blank lines") {
    const auto t = parse_csv("# provenance: seed=1\na,b\n\n1,2\n");
    CHECK(t.header.size() == 2);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.line_numbers[0] == 4);
}

TEST_CASE("csv rejects ragged rows with the line number") {
    CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2,3\n", "f.csv"),
                         doctest::Contains("f.csv:2"), SchemaError);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.6789, -0.0, 2.0}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("write then read is a fixed point") {
    const auto path = (std::filesystem::temp_directory_path() / "prognosis_csv_rt.csv").string();
    write_csv(path, {"x", "note"}, {{format_double(0.1), "a,b"}, {format_double(2.5), ""}},
              "seed=1");
    const auto t = read_csv(path);
    CHECK(t.rows[0][0] == "0.1");
    CHECK(t.rows[0][1] == "a,b");
    CHECK(t.rows[1][1] == "");
    std::filesystem::remove(path);
}

TEST_CASE("cell parsers reject garbage with context") {
    CHECK(parse_double_cell("", "ctx") == std::nullopt);
    CHECK(*parse_double_cell("2.5", "ctx") == 2.5);
    CHECK_THROWS_AS(parse_double_cell("2.5x", "ctx"), SchemaError);
    CHECK_THROWS_AS(parse_int_cell("1.5", "ctx"), SchemaError);
}
