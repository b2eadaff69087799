#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(RIGOR_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) throw std::runtime_error("popen failed");
    std::string out;
    std::array<char, 4096> buf{};
    while (const std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string corpus(const char* name) { return std::string(RIGOR_CORPUS_DIR) + "/" + name; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("rigor_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const char* name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, ProveThenCheckPaperExample)
{
    const auto p = run("prove --spec " + corpus("paper_example.ineq") + " --out " + path("certs"));
    EXPECT_EQ(p.code, 0) << p.out;
    EXPECT_NE(p.out.find("1/1 verified"), std::string::npos) << p.out;
    const std::string cert = slurp(dir_ / "certs" / "paper_example.cert");
    EXPECT_EQ(cert.rfind("rigorcert v1 paper_example ", 0), 0U) << cert;
    EXPECT_TRUE(fs::exists(dir_ / "certs" / "stats.json"));
    const auto c = run("check --spec " + corpus("paper_example.ineq") + " --cert " + path("certs"));
    EXPECT_EQ(c.code, 0) << c.out;
    EXPECT_NE(c.out.find("paper_example: Verified"), std::string::npos) << c.out;
}

TEST_F(Cli, FalseInequalityExitsOne)
{
    const auto p = run("prove --spec " + std::string(RIGOR_TESTDATA_DIR "/false.ineq") + " --out " + path("certs"));
    EXPECT_EQ(p.code, 1) << p.out;
    EXPECT_NE(p.out.find("Failure inconclusive"), std::string::npos) << p.out;
}

TEST_F(Cli, UsageAndParseErrorsExitTwo)
{
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("prove").code, 2);
    EXPECT_EQ(run("prove --spec " + path("missing.ineq")).code, 2);
    EXPECT_EQ(run("bogus").code, 2);
    EXPECT_EQ(run("prove --spec " + corpus("paper_example.ineq") + " --jobs 0").code, 2);
    EXPECT_EQ(run("prove --spec " + corpus("paper_example.ineq") + " --only nosuch --out " + path("c")).code, 2);
    spit(dir_ / "bad.ineq", "ineq \"a\" vars x in [0, 1];\nclaims x +* 1 < 0;\n");
    const auto bad = run("prove --spec " + path("bad.ineq"));
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.out.find("line 2"), std::string::npos) << bad.out;
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, PrecisionFromEnvironment)
{
    const auto bad = run("prove --spec " + corpus("paper_example.ineq") + " --out " + path("c")).code;
    EXPECT_EQ(bad, 0);
    const std::string env = "RIGOR_DEFAULT_PRECISION=abc ";
    const std::string cmd = env + RIGOR_CLI + " prove --spec " + corpus("paper_example.ineq") + " --out " + path("c") + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    EXPECT_EQ(WEXITSTATUS(status), 2);
    const std::string ok = "RIGOR_DEFAULT_PRECISION=12 " + std::string(RIGOR_CLI) + " prove --spec " + corpus("paper_example.ineq") + " --out " + path("e") + " >/dev/null 2>&1";
    EXPECT_EQ(WEXITSTATUS(std::system(ok.c_str())), 0);
    EXPECT_NE(slurp(dir_ / "e" / "paper_example.cert").find("(taylor 1 12 "), std::string::npos);
}

TEST_F(Cli, HandEditedCertificateIsRejected)
{
    ASSERT_EQ(run("prove --spec " + corpus("desk.ineq") + " --only two_halves --out " + path("certs")).code, 0);
    const fs::path file = dir_ / "certs" / "two_halves.cert";
    std::string text = slurp(file);
    const auto at = text.find("(natural 2");
    ASSERT_NE(at, std::string::npos) << text;
    text.replace(at, 10, "(natural 1");
    spit(file, text);
    const auto c = run("check --spec " + corpus("desk.ineq") + " --only two_halves --cert " + path("certs"));
    EXPECT_EQ(c.code, 1) << c.out;
    EXPECT_NE(c.out.find("Rejected at R"), std::string::npos) << c.out;
}

TEST_F(Cli, DigestMismatchIsRejected)
{
    ASSERT_EQ(run("prove --spec " + corpus("paper_example.ineq") + " --out " + path("certs")).code, 0);
    std::string spec = slurp(corpus("paper_example.ineq"));
    const auto at = spec.rfind("[1, 2]");
    ASSERT_NE(at, std::string::npos);
    spec.replace(at, 6, "[1, 1.9]");
    spit(dir_ / "edited.ineq", spec);
    const auto c = run("check --spec " + path("edited.ineq") + " --cert " + path("certs"));
    EXPECT_EQ(c.code, 1);
    EXPECT_NE(c.out.find("digest"), std::string::npos) << c.out;
}

TEST_F(Cli, MissingOrGarbledCertificate)
{
    auto c = run("check --spec " + corpus("paper_example.ineq") + " --cert " + path("nothing"));
    EXPECT_EQ(c.code, 1);
    EXPECT_NE(c.out.find("missing"), std::string::npos);
    fs::create_directories(dir_ / "g");
    spit(dir_ / "g" / "paper_example.cert", "rigorcert v1 paper_example 00\n(natural\n");
    c = run("check --spec " + corpus("paper_example.ineq") + " --cert " + path("g"));
    EXPECT_EQ(c.code, 1);
    EXPECT_NE(c.out.find("format error"), std::string::npos) << c.out;
}

TEST_F(Cli, JsonReport)
{
    const auto p = run("prove --spec " + corpus("paper_example.ineq") + " --out " + path("certs") + " --report json");
    ASSERT_EQ(p.code, 0);
    const auto j = nlohmann::json::parse(p.out);
    EXPECT_EQ(j["command"], "prove");
    EXPECT_EQ(j["items"][0]["id"], "paper_example");
    EXPECT_EQ(j["items"][0]["verdict"], "Verified");
    EXPECT_EQ(j["items"][0]["taylor_leaves"], 1);
    EXPECT_EQ(j["summary"]["verified"], 1);
    const auto stats = nlohmann::json::parse(slurp(dir_ / "certs" / "stats.json"));
    EXPECT_TRUE(stats["items"][0]["wall_time_s"].is_number());
}

TEST_F(Cli, JobsDoNotChangeCertificates)
{
    ASSERT_EQ(run("prove --spec " + corpus("desk.ineq") + " --out " + path("a") + " --jobs 1 --only quadratic motzkin cos_triangle two_halves").code, 0);
    ASSERT_EQ(run("prove --spec " + corpus("desk.ineq") + " --out " + path("b") + " --jobs 4 --only quadratic motzkin cos_triangle two_halves").code, 0);
    for (const char* id : {"quadratic", "motzkin", "cos_triangle", "two_halves"}) {
        const std::string name = std::string(id) + ".cert";
        EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name)) << id;
    }
}

TEST_F(Cli, LpPaperExample)
{
    const auto r = run("lp --sys " + corpus("paper.lp") + " --dual-hints " + corpus("paper.dual") + " --out " + path("lp"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("<= -0.2974"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir_ / "lp" / "lpstats.json"));
    const auto c = run("lp-check --sys " + corpus("paper.lp") + " --cert " + path("lp"));
    EXPECT_EQ(c.code, 0) << c.out;
    EXPECT_NE(c.out.find("paper: Certified"), std::string::npos) << c.out;
    // Without hints the simplex supplies the multipliers.
    const auto s = run("lp --sys " + corpus("paper.lp") + " --out " + path("lp2") + " --report json");
    ASSERT_EQ(s.code, 0) << s.out;
    EXPECT_EQ(nlohmann::json::parse(s.out)["items"][0]["dual_source"], "simplex+modify");
}

TEST_F(Cli, LpFailures)
{
    const auto f = run("lp --sys " + corpus("feasible.lp") + " --out " + path("lp"));
    EXPECT_EQ(f.code, 1);
    EXPECT_NE(f.out.find("NoCertificateFound"), std::string::npos) << f.out;
    spit(dir_ / "short.dual", "dual \"paper\" 1 2 3;");
    EXPECT_EQ(run("lp --sys " + corpus("paper.lp") + " --dual-hints " + path("short.dual") + " --out " + path("lp")).code, 2);
    spit(dir_ / "hopeless.dual", "dual \"paper\" 0 1;");
    const auto h = run("lp --sys " + corpus("paper.lp") + " --dual-hints " + path("hopeless.dual") + " --out " + path("lp"));
    EXPECT_EQ(h.code, 1);
    EXPECT_NE(h.out.find("Hopeless"), std::string::npos) << h.out;
    // A tampered lp certificate is rejected.
    ASSERT_EQ(run("lp --sys " + corpus("paper.lp") + " --dual-hints " + corpus("paper.dual") + " --out " + path("ok")).code, 0);
    std::string text = slurp(dir_ / "ok" / "paper.lpcert");
    const auto at = text.find("multipliers ");
    ASSERT_NE(at, std::string::npos);
    text.insert(at + 12, "1");
    spit(dir_ / "ok" / "paper.lpcert", text);
    EXPECT_EQ(run("lp-check --sys " + corpus("paper.lp") + " --cert " + path("ok")).code, 1);
}
