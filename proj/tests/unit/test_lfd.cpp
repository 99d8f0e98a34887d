#include <gtest/gtest.h>

#include <cmath>

#include "advht/lfd.hpp"
#include "advht/exponents.hpp"
#include "test_support.hpp"

using namespace advht;
using namespace advht::testing;

TEST(RatioSets, ExtremeLetters) {
  const auto s = argmax_ratio_sets(weaklfd_p(0.5), weaklfd_q());
  ASSERT_EQ(s.x_plus.size(), 1u);
  ASSERT_EQ(s.x_minus.size(), 1u);
  EXPECT_EQ(s.x_plus[0], 0u);
  EXPECT_EQ(s.x_minus[0], 4u);
  EXPECT_FALSE(s.degenerate);
}

TEST(RatioSets, Degenerate) {
  const auto p = Distribution({0.2, 0.8});
  const auto s = argmax_ratio_sets(p, p);
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.x_plus.size(), 2u);
}

TEST(Lfd, WeakButNotStrongInsideRange) {
  const auto inst = weaklfd_instance();
  for (double lambda : {0.1, 0.5, 0.8}) {
    const auto r = is_weak_lfd(weaklfd_p(lambda), weaklfd_q(), inst);
    EXPECT_TRUE(r.is_weak) << lambda;
    EXPECT_FALSE(r.is_strong) << lambda;
    EXPECT_FALSE(r.threshold_violations.empty());
  }
}

TEST(Lfd, WeakRangeEdges) {
  // Weak exactly for lambda in [2/27, 23/27].
  const auto inst = weaklfd_instance();
  EXPECT_TRUE(is_weak_lfd(weaklfd_p(2.0 / 27 + 1e-6), weaklfd_q(), inst).is_weak);
  EXPECT_TRUE(is_weak_lfd(weaklfd_p(23.0 / 27 - 1e-6), weaklfd_q(), inst).is_weak);
  EXPECT_FALSE(is_weak_lfd(weaklfd_p(2.0 / 27 - 1e-3), weaklfd_q(), inst).is_weak);
  EXPECT_FALSE(is_weak_lfd(weaklfd_p(23.0 / 27 + 1e-3), weaklfd_q(), inst).is_weak);
  EXPECT_FALSE(is_weak_lfd(weaklfd_p(0.0), weaklfd_q(), inst).is_weak);
  EXPECT_FALSE(is_weak_lfd(weaklfd_p(1.0), weaklfd_q(), inst).is_weak);
}

TEST(Lfd, GammaHcOnSegment) {
  // 81 inside the weak range, infinite at the ends where p* loses a letter.
  EXPECT_TRUE(std::isinf(gamma_hc(weaklfd_p(0.0), weaklfd_q())));
  EXPECT_TRUE(std::isinf(gamma_hc(weaklfd_p(1.0), weaklfd_q())));
  EXPECT_GT(gamma_hc(weaklfd_p(0.05), weaklfd_q()), 81.0 + 1e-6);
  for (double lambda : {2.0 / 27, 0.3, 23.0 / 27}) EXPECT_NEAR(gamma_hc(weaklfd_p(lambda), weaklfd_q()), 81.0, 1e-10);
}

TEST(Lfd, SingletonIsWeakAndStrong) {
  const auto inst = singleton_instance();
  const auto r = is_strong_lfd(inst.p0.vertex(0), inst.p1.vertex(0), inst);
  EXPECT_TRUE(r.is_weak);
  EXPECT_TRUE(r.is_strong);
}

TEST(Lfd, NonMemberRejected) {
  const auto inst = weaklfd_instance();
  EXPECT_THROW(is_weak_lfd(weaklfd_q(), weaklfd_q(), inst), ValidationError);
}

TEST(Lfd, ThresholdCheckDirect) {
  // Strictly between the two extreme ratios only interior events matter.
  const auto inst = singleton_instance();
  EXPECT_TRUE(check_threshold(inst.p0.vertex(0), inst.p1.vertex(0), inst, 1.0).empty());
}

TEST(Lfd, ErrorProbability) {
  EXPECT_EQ(weak_lfd_pe(weaklfd_p(0.5), weaklfd_q(), 2), 0.1);
  const auto p = Distribution({0.3, 0.7});
  EXPECT_EQ(weak_lfd_pe(p, p, 4), 0.5);
}

TEST(Lfd, ScanFindsPairOnSingleton) {
  const auto r = scan_weak_lfd(singleton_instance(), 4, 1);
  ASSERT_TRUE(r.pair);
  EXPECT_GT(r.candidates_tried, 0);
}

TEST(Lfd, ReportJson) {
  const auto inst = weaklfd_instance();
  const auto j = to_json(is_weak_lfd(weaklfd_p(0.5), weaklfd_q(), inst));
  EXPECT_TRUE(j.at("is_weak").get<bool>());
  EXPECT_FALSE(j.at("is_strong").get<bool>());
}
