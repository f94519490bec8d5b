#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavnoise/analysis.hpp"
#include "oracles.hpp"

using namespace cavnoise;
constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

namespace {

SidebandState demo_state(double nu = 6.0) { return SidebandState{0.5, 2.0, 0.0, nu}; }
CavityParams lossless(ResponseModel model = ResponseModel::exact_airy) {
  return CavityParams(MirrorPair(0.999, 1.0), model);
}
CavityParams reference_cavity() { return CavityParams(MirrorPair::from_loss(0.95, 0.003)); }

}  // namespace

TEST(UniformGrid, EndpointsExactAndIncreasing) {
  const auto g = uniform_grid(-12.0, 12.0, 2001);
  ASSERT_EQ(g.size(), 2001u);
  EXPECT_EQ(g.front(), -12.0);
  EXPECT_EQ(g.back(), 12.0);
  EXPECT_EQ(g[1000], 0.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end(), std::less_equal<>{}) &&
              std::adjacent_find(g.begin(), g.end()) == g.end());
  EXPECT_THROW(uniform_grid(0.0, 1.0, 1), InvalidParameter);
  EXPECT_THROW(uniform_grid(1.0, 0.0, 5), InvalidParameter);
}

TEST(ReflectanceCurve, RowsFollowCavityResponse) {
  const CavityParams c = reference_cavity();
  const auto curve = reflectance_curve(-5.0, 5.0, 1001, c);
  ASSERT_EQ(curve.rows.size(), 1001u);
  EXPECT_TRUE(curve.excluded.empty());
  const auto& mid = curve.rows[500];
  EXPECT_EQ(mid.detuning, 0.0);
  EXPECT_NEAR(mid.reflectance, std::norm(oracle::series_reflectance(0.95, 0.997, 0.0)), 1e-12);
  EXPECT_NEAR(mid.phase, kPi, 1e-12);
  EXPECT_NEAR(mid.reflectance + mid.transmittance, 1.0, 1e-12);
  EXPECT_THROW(reflectance_curve(-100.0, 0.0, 10, c), InvalidParameter);
}

TEST(DetuningSweep, ReferenceProfileHasFourPeaks) {
  const NoiseSweep s = detuning_sweep(-12.0, 12.0, 2001, demo_state(), reference_cavity());
  ASSERT_EQ(s.rows.size(), 2001u);
  const auto peaks = local_maxima(s);
  ASSERT_EQ(peaks.size(), 4u);
  const double expected[] = {-6.0, -0.5, 0.5, 6.0};
  const double window[] = {0.5, 0.2, 0.2, 0.5};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(s.rows[peaks[i]].detuning, expected[i], window[i]);
  }
  EXPECT_GT(std::min(s.rows[peaks[1]].noise, s.rows[peaks[2]].noise),
            std::max(s.rows[peaks[0]].noise, s.rows[peaks[3]].noise));
  EXPECT_NEAR(s.rows[1000].noise / 0.5, 1.0, 0.01);
  for (const auto& r : s.rows) {
    EXPECT_GE(r.noise, 0.5 - 1e-12);
    EXPECT_LE(r.noise, 2.0 + 1e-12);
  }
}

TEST(DetuningSweep, ShotNoiseInputGivesFlatProfile) {
  const NoiseSweep s = detuning_sweep(-12.0, 12.0, 501, SidebandState{1.0, 1.0, 0.0, 6.0}, reference_cavity());
  for (const auto& r : s.rows) EXPECT_NEAR(r.noise, 1.0, 1e-12);
}

TEST(DetuningSweep, BelowThresholdNeverConvertsFully) {
  const NoiseSweep s = detuning_sweep(-12.0, 12.0, 24001, demo_state(1.0), lossless());
  double worst = 0.0, max_angle = 0.0;
  for (const auto& r : s.rows) {
    worst = std::max(worst, r.noise);
    max_angle = std::max(max_angle, r.angle_magnitude);
  }
  EXPECT_LT(worst, 2.0 - 1e-3);
  EXPECT_LT(max_angle, kPi / 2 - 1e-3);
}

TEST(DetuningSweep, ExtinguishedCarrierRowsAreExcluded) {
  const NoiseSweep s = detuning_sweep(-1.0, 1.0, 3, demo_state(), CavityParams(MirrorPair(0.9, 0.9)));
  EXPECT_EQ(s.rows.size(), 2u);
  ASSERT_EQ(s.excluded.size(), 1u);
  EXPECT_EQ(s.excluded[0].detuning, 0.0);
}

TEST(DetuningSweep, RejectsBadRangesAndRotatedEllipse) {
  EXPECT_THROW(detuning_sweep(-100.0, 0.0, 10, demo_state(), reference_cavity()), InvalidParameter);
  EXPECT_THROW(detuning_sweep(1.0, 0.0, 10, demo_state(), reference_cavity()), InvalidParameter);
  EXPECT_THROW(detuning_sweep(-1.0, 1.0, 10, SidebandState{0.5, 2.0, 0.3, 6.0}, reference_cavity()),
               InvalidParameter);
}

TEST(DetuningSweep, RepeatableBitForBit) {
  const auto a = detuning_sweep(-12.0, 12.0, 301, demo_state(), reference_cavity());
  const auto b = detuning_sweep(-12.0, 12.0, 301, demo_state(), reference_cavity());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].noise, b.rows[i].noise);
    EXPECT_EQ(a.rows[i].signed_angle, b.rows[i].signed_angle);
  }
}

TEST(CriticalDetunings, SinglePartialExtremumBelowThreshold) {
  const CriticalSet s = find_critical_detunings(demo_state(1.0), lossless());
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].kind, CriticalKind::partial_extremum);
  EXPECT_LT(s.points[0].noise, 2.0 * (1.0 - 1e-6));
}

TEST(CriticalDetunings, ThreePointsAboveThreshold) {
  const CriticalSet s = find_critical_detunings(demo_state(6.0), lossless());
  ASSERT_EQ(s.points.size(), 3u);
  EXPECT_EQ(s.points[0].kind, CriticalKind::full_conversion_max);
  EXPECT_EQ(s.points[1].kind, CriticalKind::inflection);
  EXPECT_EQ(s.points[2].kind, CriticalKind::full_conversion_max);
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) {
      EXPECT_LT(s.points[i - 1].detuning, s.points[i].detuning);
    }
    const double deriv = noise_derivative(s.points[i].detuning, demo_state(6.0), lossless(), 1e-6);
    EXPECT_LT(std::abs(deriv), 1e-6 * 2.0);
  }
}

TEST(CriticalDetunings, HighFrequencyAsymptotesMatchBruteForce) {
  const double nu = 50.0;
  const SidebandState st = demo_state(nu);
  const CavityParams c = lossless();
  const CriticalSet s = find_critical_detunings(st, c);
  std::vector<double> full;
  for (const auto& p : s.points) {
    if (p.kind == CriticalKind::full_conversion_max) full.push_back(p.detuning);
  }
  ASSERT_EQ(full.size(), 2u);
  EXPECT_NEAR(full[0] / 0.5, 1.0, 0.05);
  EXPECT_NEAR(full[1] / nu, 1.0, 0.05);

  // 10^6-point brute-force scan of S_R over the same range.
  const int n = 1000000;
  const double upper = default_search_max(nu);
  const double step = upper / n;
  std::vector<double> maxima;
  double s0 = reflected_noise(step, st, c), s1 = reflected_noise(2 * step, st, c);
  for (int i = 3; i <= n; ++i) {
    const double s2 = reflected_noise(i * step, st, c);
    if (s1 > s0 && s1 >= s2 && s1 > 2.0 * (1.0 - 1e-6)) maxima.push_back((i - 1) * step);
    s0 = s1;
    s1 = s2;
  }
  ASSERT_EQ(maxima.size(), 2u);
  EXPECT_NEAR(full[0], maxima[0], step);
  EXPECT_NEAR(full[1], maxima[1], step);
}

TEST(CriticalDetunings, ClassificationSoundnessLossless) {
  const CavityParams c = lossless();
  for (double nu = 0.5; nu <= 10.0; nu += 0.25) {
    if (std::abs(nu - kSqrt2) < 0.005) continue;
    const CriticalSet s = find_critical_detunings(demo_state(nu), c);
    for (const auto& p : s.points) {
      const bool at_sq = std::abs(p.noise - 2.0) <= 1e-6 * 2.0;
      if (p.kind == CriticalKind::full_conversion_max) {
        EXPECT_TRUE(at_sq) << nu << " " << p.detuning;
      } else if (p.kind == CriticalKind::partial_extremum) {
        EXPECT_FALSE(at_sq) << nu << " " << p.detuning;
      }
    }
  }
}

TEST(CriticalDetunings, RefinementStableUnderDenserBracketing) {
  CriticalSearchOptions dense;
  dense.grid_points = 20000;
  for (double nu : {1.0, 3.0, 6.0}) {
    const auto a = find_critical_detunings(demo_state(nu), lossless());
    const auto b = find_critical_detunings(demo_state(nu), lossless(), dense);
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      EXPECT_NEAR(a.points[i].detuning, b.points[i].detuning, 2e-9);
      EXPECT_EQ(a.points[i].kind, b.points[i].kind);
    }
  }
}

TEST(CriticalDetunings, DerivativeStepHalvingAgrees) {
  const SidebandState st = demo_state(6.0);
  for (double d : {0.2, 1.7, 4.0, 7.5}) {
    const double a = noise_derivative(d, st, lossless(), 1e-6);
    const double b = noise_derivative(d, st, lossless(), 5e-7);
    EXPECT_NEAR(a, b, 1e-4 * std::max(1.0, std::abs(a)));
  }
}

TEST(CriticalDetunings, Errors) {
  EXPECT_THROW(find_critical_detunings(SidebandState{1.0, 1.0, 0.0, 6.0}, lossless()), InvalidParameter);
  CriticalSearchOptions bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(find_critical_detunings(demo_state(), lossless(), bad), InvalidParameter);
}

TEST(Threshold, LorentzianNearSqrtTwo) {
  const double t = conversion_threshold(lossless(ResponseModel::lorentzian));
  EXPECT_NEAR(t, kSqrt2, 0.01);
  EXPECT_NEAR(t, 1.4142, 1e-3);
}

TEST(Threshold, ExactAgreesWithLorentzian) {
  EXPECT_NEAR(conversion_threshold(lossless()), conversion_threshold(lossless(ResponseModel::lorentzian)), 1e-2);
}

TEST(Threshold, MatchesTwoDimensionalBruteForceScan) {
  // Smallest v' on a 1e-3 grid whose rotation reaches pi/2 at some D on a 1e-3 grid.
  double first = 0.0;
  for (int k = 0; k <= 1000 && first == 0.0; ++k) {
    const double nu = 1.0 + 1e-3 * k;
    for (int j = 1; j <= 5000; ++j) {
      if (oracle::lorentzian_lossless_rotation(1e-3 * j, nu) >= kPi / 2 - 1e-6) {
        first = nu;
        break;
      }
    }
  }
  ASSERT_GT(first, 0.0);
  EXPECT_NEAR(conversion_threshold(lossless(ResponseModel::lorentzian)), first, 2e-3);
}

TEST(Threshold, InvalidBracketIsANumericalFailure) {
  ThresholdOptions opt;
  opt.upper = 1.2;
  EXPECT_THROW(conversion_threshold(lossless(), opt), NumericalFailure);
  opt = {};
  opt.lower = 1.6;
  EXPECT_THROW(conversion_threshold(lossless(), opt), NumericalFailure);
}

TEST(Bifurcation, BranchCountChangesOnceNearThreshold) {
  const auto scan = bifurcation_scan(1.3, 1.5, 201, demo_state(), lossless());
  std::size_t changes = 0;
  double where = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    ASSERT_TRUE(scan[i].critical) << scan[i].error;
    if (i && scan[i].critical->points.size() != scan[i - 1].critical->points.size()) {
      ++changes;
      where = scan[i].analysis_frequency;
      EXPECT_EQ(scan[i - 1].critical->points.size(), 1u);
      EXPECT_EQ(scan[i].critical->points.size(), 3u);
    }
  }
  EXPECT_EQ(changes, 1u);
  EXPECT_NEAR(where, kSqrt2, 0.01);
}

TEST(Bifurcation, FullRangeBranchCounts) {
  const auto scan = bifurcation_scan(0.2, 10.0, 50, demo_state(), lossless());
  ASSERT_EQ(scan.size(), 50u);
  for (const auto& s : scan) {
    ASSERT_TRUE(s.critical) << s.error;
    const std::size_t expected = s.analysis_frequency < kSqrt2 ? 1u : 3u;
    EXPECT_EQ(s.critical->points.size(), expected) << s.analysis_frequency;
    EXPECT_EQ(s.carrier_asymptote(), 0.5);
    EXPECT_EQ(s.sideband_asymptote(), s.analysis_frequency);
  }
}

TEST(Bifurcation, SingleSampleMatchesDirectSearch) {
  const auto scan = bifurcation_scan(6.0, 6.0, 5, demo_state(), lossless());
  ASSERT_EQ(scan.size(), 1u);
  const auto direct = find_critical_detunings(demo_state(6.0), lossless());
  ASSERT_EQ(scan[0].critical->points.size(), direct.points.size());
  for (std::size_t i = 0; i < direct.points.size(); ++i) {
    EXPECT_EQ(scan[0].critical->points[i].detuning, direct.points[i].detuning);
  }
}

TEST(Bifurcation, UpperBranchFollowsSidebandAsymptote) {
  for (const auto& s : bifurcation_scan(5.0, 10.0, 11, demo_state(), lossless())) {
    if (s.analysis_frequency < 8.0) continue;
    EXPECT_NEAR(s.critical->points.back().detuning / s.analysis_frequency, 1.0, 0.05);
  }
}

TEST(Bifurcation, RejectsRangeOutsideLimits) {
  EXPECT_THROW(bifurcation_scan(0.0, 5.0, 10, demo_state(), lossless()), InvalidParameter);
  EXPECT_THROW(bifurcation_scan(1.0, 25.0, 10, demo_state(), lossless()), InvalidParameter);
  EXPECT_THROW(bifurcation_scan(5.0, 1.0, 10, demo_state(), lossless()), InvalidParameter);
  EXPECT_THROW(bifurcation_scan(1.0, 5.0, 0, demo_state(), lossless()), InvalidParameter);
}

TEST(Matching, SmallestConversionShrinksTowardImpedanceMatch) {
  const auto rows = matching_study(demo_state(6.0), 0.95, {0.049, 0.0, 0.025, 0.01, 0.04});
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].smallest_conversion) << rows[i].status;
    EXPECT_EQ(rows[i].status, "ok");
    if (i) {
      EXPECT_LT(rows[i - 1].output_loss, rows[i].output_loss);
      EXPECT_LT(*rows[i].smallest_conversion, *rows[i - 1].smallest_conversion);
    }
  }
  EXPECT_LT(*rows.back().smallest_conversion, 0.1);
}

TEST(Matching, SmallLossApproachesLosslessValue) {
  const auto rows = matching_study(demo_state(6.0), 0.95, {0.0, 1e-6});
  ASSERT_TRUE(rows[0].smallest_conversion && rows[1].smallest_conversion);
  EXPECT_NEAR(*rows[0].smallest_conversion, *rows[1].smallest_conversion, 1e-3);
}

TEST(Matching, EmptyLossListGivesEmptyTable) {
  EXPECT_TRUE(matching_study(demo_state(6.0), 0.95, {}).empty());
}
