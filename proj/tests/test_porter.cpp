#include "doctest.h"

#include "arl/porter.hpp"

#include <fstream>
#include <string>

using arl::porter_stem;

TEST_SUITE("porter") {
  TEST_CASE("reference examples") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("ties") == "ti");
    CHECK(porter_stem("caress") == "caress");
    CHECK(porter_stem("cats") == "cat");
    CHECK(porter_stem("feed") == "feed");
    CHECK(porter_stem("agreed") == "agre");
    CHECK(porter_stem("plastered") == "plaster");
    CHECK(porter_stem("motoring") == "motor");
    CHECK(porter_stem("sing") == "sing");
    CHECK(porter_stem("hopping") == "hop");
    CHECK(porter_stem("falling") == "fall");
    CHECK(porter_stem("filing") == "file");
    CHECK(porter_stem("happy") == "happi");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("generalization") == "gener");
    CHECK(porter_stem("running") == "run");
    CHECK(porter_stem("runner") == "runner");
    CHECK(porter_stem("runs") == "run");
  }

  TEST_CASE("short and non-conforming tokens pass through") {
    CHECK(porter_stem("a") == "a");
    CHECK(porter_stem("is") == "is");
    CHECK(porter_stem("") == "");
    CHECK(porter_stem("Running") == "Running");
    CHECK(porter_stem("abc123") == "abc123");
    CHECK(porter_stem("http://x.y") == "http://x.y");
  }

  TEST_CASE("departures of the reference C release") {
    // "bli" -> "ble" and "logi" -> "log" in step 2.
    CHECK(porter_stem("possibly") == "possibl");
    CHECK(porter_stem("archaeology") == "archaeolog");
  }

  TEST_CASE("published vocabulary") {
    std::ifstream voc(ARL_TEST_DATA_DIR "/porter_voc.txt");
    std::ifstream expected(ARL_TEST_DATA_DIR "/porter_output.txt");
    REQUIRE(voc);
    REQUIRE(expected);
    std::string w, s;
    int total = 0, agree = 0;
    while (std::getline(voc, w) && std::getline(expected, s)) {
      ++total;
      agree += porter_stem(w) == s;
    }
    CHECK(total == 23531);
    CHECK(agree == total);
  }
}
