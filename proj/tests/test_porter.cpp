// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <string>
#include <vector>

#include "bugcause/porter.hpp"

using bugcause::porter_stem;

namespace {

std::vector<std::string> read_lines(const std::string& name) {
    std::ifstream in(std::string(BUGCAUSE_TEST_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("conformance with the shipped test vector pair") {
    auto voc = read_lines("porter_voc.txt");
    auto expected = read_lines("porter_output.txt");
    REQUIRE(voc.size() == expected.size());
    for (std::size_t i = 0; i < voc.size(); ++i) {
        INFO("word: ", voc[i]);
        CHECK(porter_stem(voc[i]) == expected[i]);
    }
}

TEST_CASE("short words pass through") {
    CHECK(porter_stem("") == "");
    CHECK(porter_stem("a") == "a");
    CHECK(porter_stem("is") == "is");
    CHECK(porter_stem("sky") == "sky");
}

TEST_CASE("plurals and participles") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("closing") == "close");
    CHECK(porter_stem("hopping") == "hop");
}
