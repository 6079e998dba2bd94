#include <gtest/gtest.h>

#include <set>

#include "mimosim/random.hpp"
#include "test_util.hpp"

using namespace mimosim;

TEST(RandomStream, SameKeySameSequence) {
  RandomStream a = RandomStream::derive(42, 3, StreamPurpose::Channel);
  RandomStream b = RandomStream::derive(42, 3, StreamPurpose::Channel);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.bits64(), b.bits64());
}

TEST(RandomStream, PurposesAndTrialsAreDistinct) {
  std::set<std::uint64_t> first;
  for (std::uint64_t trial = 0; trial < 50; ++trial)
    for (auto p : {StreamPurpose::Geometry, StreamPurpose::Shadowing, StreamPurpose::Channel, StreamPurpose::Frames})
      first.insert(RandomStream::derive(7, trial, p).bits64());
  EXPECT_EQ(first.size(), 200u);
}

TEST(RandomStream, ChildDoesNotAdvanceParent) {
  RandomStream a(99);
  RandomStream b(99);
  (void)a.child(5).bits64();
  (void)a.child({1, 2, 3});
  EXPECT_EQ(a.bits64(), b.bits64());
}

TEST(RandomStream, ChildPathMatchesNestedChildren) {
  RandomStream root(17);
  RandomStream nested = root.child(1).child(2);
  RandomStream path = root.child({1, 2});
  EXPECT_EQ(nested.key(), path.key());
  EXPECT_EQ(nested.bits64(), path.bits64());
}

TEST(RandomStream, UniformRange) {
  RandomStream r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform(-3.0, 2.0);
    ASSERT_GE(v, -3.0);
    ASSERT_LT(v, 2.0);
  }
}

TEST(RandomStream, ComplexNormalMoments) {
  RandomStream r(5);
  const int n = 200000;
  mimosim::testing::Stats pw, re, im, cross;
  for (int i = 0; i < n; ++i) {
    const Complex z = r.complex_normal(2.5);
    pw.add(std::norm(z));
    re.add(z.real());
    im.add(z.imag());
    cross.add(z.real() * z.imag());
  }
  EXPECT_NEAR(pw.mean(), 2.5, 3 * pw.sem());
  EXPECT_NEAR(re.mean(), 0.0, 3 * re.sem());
  EXPECT_NEAR(im.mean(), 0.0, 3 * im.sem());
  EXPECT_NEAR(cross.mean(), 0.0, 3 * cross.sem());
}

TEST(RandomStream, ZeroVarianceIsZero) {
  RandomStream r(5);
  const CMatrix m = r.complex_normal_matrix(3, 4, 0.0);
  EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RandomStream, SplitMixKnownValue) {
  // First output of the reference SplitMix64 generator seeded with 0.
  EXPECT_EQ(detail::splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Types, ParsingAcceptsAliases) {
  EXPECT_EQ(parse_topology("CF"), Topology::CellFree);
  EXPECT_EQ(parse_topology("multi-cell"), Topology::MultiCell);
  EXPECT_EQ(parse_precoder("cb"), PrecoderKind::MF);
  EXPECT_EQ(parse_precoder("Mmse"), PrecoderKind::MMSE);
  EXPECT_EQ(parse_allocator("r-apa"), AllocatorKind::RAPA);
  EXPECT_THROW(parse_allocator("greedy"), std::invalid_argument);
  EXPECT_EQ(to_string(AllocatorKind::RAPA), "RAPA");
  EXPECT_EQ(to_string(Topology::MultiCell), "mc");
}
