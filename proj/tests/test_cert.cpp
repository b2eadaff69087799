#include "rigor/prover.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace rigor;

namespace {

Decimal D(const char* s) { return Decimal::parse(s); }

InequalitySpec one(const std::string& text) { return parse_specs(text).at(0); }

Certificate cert_for(const InequalitySpec& spec, CertNode root) { return {spec.id, spec_digest(spec), std::move(root)}; }

CertNode natural(int d, int p) { return {NaturalLeaf{d, p}}; }

CertNode split(int var, const char* mid, CertNode l, CertNode r) { return {SplitNode{var, D(mid), {std::move(l), std::move(r)}}}; }

std::string rejection_path(const CheckResult& r) { return std::holds_alternative<Rejected>(r) ? std::get<Rejected>(r).path : "verified"; }

const char* kQuad = R"(ineq "q" vars x in [0, 2]; claims x^2 - 4.5 < 0;)";

} // namespace

TEST(Cert, Sha256KnownVectors)
{
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cert, HandWrittenCertificates)
{
    const auto spec = one(kQuad);
    EXPECT_TRUE(is_verified(check(spec, cert_for(spec, natural(0, 5)))));
    const auto wide = one(R"(ineq "w" vars x in [0, 2.2]; claims x^2 - 4.5 < 0;)");
    // 2.2^2 = 4.84 exceeds 4.5.
    EXPECT_EQ(rejection_path(check(wide, cert_for(wide, natural(0, 5)))), "root");
    const auto tight = one(R"(ineq "t" vars x in [-2.1, 2.1]; claims x * x - 4.5 < 0;)");
    // x*x on [-2.1, 2.1] is [-4.41, 4.41]: natural already works; a split
    // with a bad leaf in the right half is reported at path R.
    EXPECT_TRUE(is_verified(check(tight, cert_for(tight, natural(0, 5)))));
    const auto bad = one(R"(ineq "b" vars x in [0, 3]; claims x^2 - 4.5 < 0;)");
    EXPECT_EQ(rejection_path(check(bad, cert_for(bad, split(0, "1", natural(0, 5), natural(0, 5))))), "R");
    EXPECT_EQ(rejection_path(check(bad, cert_for(bad, split(0, "1", natural(0, 5), split(0, "2", natural(0, 5), natural(0, 5)))))), "R/R");
}

TEST(Cert, MalformedNodesAreRejected)
{
    const auto spec = one(kQuad);
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, natural(1, 5)))), "root");
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, natural(0, 0)))), "root");
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, split(0, "2", natural(0, 5), natural(0, 5))))), "root");
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, split(1, "1", natural(0, 5), natural(0, 5))))), "root");
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, CertNode{TaylorLeaf{0, 5, {D("3")}}}))), "root");
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, CertNode{SharpRoot{}}))), "sharp");
}

TEST(Cert, IdentityAndDigestAreBound)
{
    const auto spec = one(kQuad);
    auto c = cert_for(spec, natural(0, 5));
    c.spec_id = "other";
    EXPECT_FALSE(is_verified(check(spec, c)));
    c = cert_for(spec, natural(0, 5));
    c.spec_digest[0] = c.spec_digest[0] == '0' ? '1' : '0';
    const auto r = check(spec, c);
    ASSERT_FALSE(is_verified(r));
    EXPECT_NE(std::get<Rejected>(r).reason.find("digest"), std::string::npos);
    // Changing the domain changes the digest.
    EXPECT_NE(spec_digest(spec), spec_digest(one(R"(ineq "q" vars x in [0, 2.1]; claims x^2 - 4.5 < 0;)")));
}

TEST(Cert, MonotoneFacetIsChecked)
{
    const auto spec = one(R"(ineq "m" vars x in [0, 1], y in [0, 1]; claims x + y^2 - 2.5 < 0;)");
    const CertNode facet{MonotoneNode{0, 0, +1, 6, {natural(0, 6)}}};
    EXPECT_TRUE(is_verified(check(spec, cert_for(spec, facet))));
    const CertNode wrong{MonotoneNode{0, 0, -1, 6, {natural(0, 6)}}};
    EXPECT_EQ(rejection_path(check(spec, cert_for(spec, wrong))), "root");
    const CertNode deeper{MonotoneNode{0, 0, +1, 6, {CertNode{MonotoneNode{0, 1, +1, 6, {natural(0, 6)}}}}}};
    EXPECT_TRUE(is_verified(check(spec, cert_for(spec, deeper))));
    const auto two = one(R"(ineq "m2" vars x in [0, 1]; claims x - 2 < 0 \/ -x - 2 < 0;)");
    const CertNode mixed{MonotoneNode{0, 0, +1, 6, {natural(1, 6)}}};
    EXPECT_EQ(rejection_path(check(two, cert_for(two, mixed))), "facet");
}

TEST(Cert, TextFormat)
{
    const auto spec = one(kQuad);
    const Certificate c = cert_for(spec, split(0, "1", natural(0, 5), CertNode{TaylorLeaf{0, 7, {D("1.5")}}}));
    const std::string text = serialize(c);
    EXPECT_EQ(text, "rigorcert v1 q " + spec_digest(spec) + "\n(split 1 1\n  (natural 1 5)\n  (taylor 1 7 (1.5)))\n");
    EXPECT_EQ(deserialize(text), c);
}

TEST(Cert, DeserializeRejectsGarbage)
{
    const auto spec = one(kQuad);
    const std::string good = serialize(cert_for(spec, natural(0, 5)));
    EXPECT_THROW(deserialize(""), FormatError);
    EXPECT_THROW(deserialize("rigorcert v2 q abc\n(natural 1 5)\n"), FormatError);
    EXPECT_THROW(deserialize("notacert v1 q abc\n(natural 1 5)\n"), FormatError);
    EXPECT_THROW(deserialize("rigorcert v1 q\n(natural 1 5)\n"), FormatError);
    EXPECT_THROW(deserialize(good.substr(0, good.size() - 3)), FormatError);
    EXPECT_THROW(deserialize(good + "(natural 1 5)\n"), FormatError);
    EXPECT_THROW(deserialize("rigorcert v1 q abc\n(bogus 1 5)\n"), FormatError);
    EXPECT_THROW(deserialize("rigorcert v1 q abc\n(natural x 5)\n"), FormatError);
}

TEST(Cert, SharpGeometryCoversTheDomain)
{
    const auto spec = one(R"(ineq "s" vars x in [0, 1], y in [2, 2], z in [-1, 1]; claims -x - z - 1 <= 0; sharp at lo lo lo;)");
    const auto g = sharp_geometry(spec, {D("0.25"), D("0.5"), D("0.5")});
    EXPECT_EQ(g.free_vars, (std::vector<int>{0, 2}));
    EXPECT_EQ(g.neighborhood[0], Interval(D("0"), D("0.25")));
    EXPECT_EQ(g.neighborhood[2], Interval(D("-1"), D("0")));
    ASSERT_EQ(g.complements.size(), 2U);
    EXPECT_EQ(g.complements[0][0], Interval(D("0.25"), D("1")));
    EXPECT_EQ(g.complements[0][2], Interval(D("-1"), D("1")));
    EXPECT_EQ(g.complements[1][0], Interval(D("0"), D("0.25")));
    EXPECT_EQ(g.complements[1][2], Interval(D("0"), D("1")));
    EXPECT_EQ(corner_point(spec), (std::vector<Rational>{0, 2, -1}));
}

TEST(Cert, SharpCertificateChecks)
{
    const auto spec = one(R"(ineq "s" vars x in [0, 1]; claims -x <= 0; sharp at lo;)");
    const auto r = prove(spec, {});
    ASSERT_TRUE(r.proved());
    EXPECT_TRUE(is_verified(check(spec, r.certificate())));
    auto c = r.certificate();
    auto& root = std::get<SharpRoot>(c.root.node);
    root.signs[0].sign = +1;
    EXPECT_EQ(rejection_path(check(spec, c)), "sharp/sign[1]");
    c = r.certificate();
    std::get<SharpRoot>(c.root.node).fractions[0] = D("1");
    EXPECT_EQ(rejection_path(check(spec, c)), "sharp");
    // A non-sharp proof of a claim that is zero at the corner cannot pass.
    c = r.certificate();
    c.root = natural(0, 10);
    EXPECT_FALSE(is_verified(check(spec, c)));
}

TEST(Cert, CheckerReusesTables)
{
    const auto spec = one(kQuad);
    const ClaimTables tables(spec);
    for (int i = 0; i < 3; ++i) EXPECT_TRUE(is_verified(check(spec, cert_for(spec, natural(0, 5)), tables)));
}
