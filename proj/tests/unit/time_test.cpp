#include <gtest/gtest.h>

#include "rtsim/time.hpp"

namespace rtsim {
namespace {

TEST(ParseDuration, Suffixes) {
  EXPECT_EQ(parse_duration("17"), 17);
  EXPECT_EQ(parse_duration("17ns"), 17);
  EXPECT_EQ(parse_duration("3us"), 3'000);
  EXPECT_EQ(parse_duration("5ms"), 5'000'000);
  EXPECT_EQ(parse_duration("1s"), 1'000'000'000);
  EXPECT_EQ(parse_duration("0"), 0);
}

TEST(ParseDuration, RejectsFractionsSignsAndJunk) {
  for (const char* bad : {"1.5ms", "0.1s", "-3", "+3", "", "ms", "3 ms", "3m", "3xs", "1e3"}) {
    EXPECT_THROW(parse_duration(bad), std::invalid_argument) << bad;
  }
}

TEST(ParseDuration, RejectsOverflow) {
  EXPECT_THROW(parse_duration("9223372036854775808"), std::invalid_argument);
  EXPECT_THROW(parse_duration("9223372037s"), std::invalid_argument);
  EXPECT_EQ(parse_duration("9223372036s"), 9'223'372'036'000'000'000LL);
}

TEST(FormatDuration, LargestExactSuffix) {
  EXPECT_EQ(format_duration(0), "0ns");
  EXPECT_EQ(format_duration(1500), "1500ns");
  EXPECT_EQ(format_duration(2000), "2us");
  EXPECT_EQ(format_duration(100'000), "100us");
  EXPECT_EQ(format_duration(3'000'000), "3ms");
  EXPECT_EQ(format_duration(2'000'000'000), "2s");
}

TEST(FormatDuration, RoundTrips) {
  for (TimeNs v : {0LL, 1LL, 999LL, 1000LL, 5376LL, 100'000LL, 7'000'000LL, 60'000'000'000LL}) {
    EXPECT_EQ(parse_duration(format_duration(v)), v);
  }
}

TEST(LcmCapped, ExactAndSaturating) {
  EXPECT_EQ(lcm_capped(4, 6, 1000), 12);
  EXPECT_EQ(lcm_capped(100, 250, 100000), 500);
  EXPECT_EQ(lcm_capped(7, 11, 50), 50);
}

}  // namespace
}  // namespace rtsim
