#include "properties.hpp"

#include <gtest/gtest.h>

using namespace rigor;

namespace {

std::vector<InequalitySpec> small_desk()
{
    auto specs = parse_specs(props::slurp(RIGOR_CORPUS_DIR "/desk.ineq"));
    specs.erase(std::remove_if(specs.begin(), specs.end(), [](const auto& s) { return s.arity() > 2; }), specs.end());
    return specs;
}

} // namespace

TEST(Properties, IntervalContainment)
{
    const auto r = props::interval_containment(5000, 101);
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, TaylorContainment)
{
    const auto r = props::taylor_containment(500, 102);
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, DerivativeVersusDifference)
{
    const auto r = props::derivative_vs_difference(500, 103, "1e-4", "1e-4");
    EXPECT_TRUE(r.ok) << r.detail;
}

TEST(Properties, TamperedCertificates)
{
    const auto specs = parse_specs(props::slurp(RIGOR_CORPUS_DIR "/desk.ineq"));
    std::vector<Certificate> certs;
    for (const auto& s : specs) {
        const auto r = prove(s, {});
        ASSERT_TRUE(r.proved()) << s.id;
        certs.push_back(r.certificate());
    }
    const auto out = props::tamper_trials(specs, certs, 100, 2000, 104);
    EXPECT_GE(out.rejected, 95);
    EXPECT_EQ(out.survived_unsound, 0);
    EXPECT_EQ(out.rejected + out.survived_sound, 100);
}

TEST(Properties, LpAgainstEnumeration)
{
    const auto out = props::lp_vs_enumeration(60, 105);
    EXPECT_EQ(out.unsound, 0);
    EXPECT_GT(out.infeasible, 5);
}

TEST(Properties, BatchDeterminism)
{
    const auto specs = small_desk();
    const auto one = props::batch_texts(specs, 1);
    EXPECT_EQ(props::batch_texts(specs, 4), one);
}

TEST(Properties, ProofsHoldOnSamples)
{
    // Proved specs also hold on dense samples, and the false one does not.
    std::mt19937_64 rng(106);
    for (const auto& s : small_desk()) EXPECT_TRUE(props::claim_holds_on_samples(s, 500, rng)) << s.id;
    const auto bad = parse_specs(props::slurp(RIGOR_TESTDATA_DIR "/false.ineq")).at(0);
    EXPECT_FALSE(props::claim_holds_on_samples(bad, 500, rng));
}
