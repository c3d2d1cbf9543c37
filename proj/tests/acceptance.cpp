// Acceptance runner: links the suites that back criteria 1-8 and runs each criterion as a doctest
// filter over them. One PASS/FAIL line per criterion; a criterion fails if any matched case fails,
// if its filter matches no case, or if it exceeds its time budget.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace {

int g_cases = 0;

struct CaseCounter : doctest::IReporter {
    explicit CaseCounter(const doctest::ContextOptions&) {}
    void report_query(const doctest::QueryData&) override {}
    void test_run_start() override {}
    void test_run_end(const doctest::TestRunStats&) override {}
    void test_case_start(const doctest::TestCaseData&) override { ++g_cases; }
    void test_case_reenter(const doctest::TestCaseData&) override {}
    void test_case_end(const doctest::CurrentTestCaseStats&) override {}
    void test_case_exception(const doctest::TestCaseException&) override {}
    void subcase_start(const doctest::SubcaseSignature&) override {}
    void subcase_end() override {}
    void log_assert(const doctest::AssertData&) override {}
    void log_message(const doctest::MessageData&) override {}
    void test_case_skipped(const doctest::TestCaseData&) override {}
};

}  // namespace

REGISTER_LISTENER("case_counter", 1, CaseCounter);

namespace {

struct Criterion {
    int id;
    const char* what;
    double budget_s;
    // doctest test-case filter; ',' separates patterns, so names containing commas use '?'
    const char* filter;
    int min_cases;
};

const std::vector<Criterion> kCriteria{
    {1, "gadget arithmetic (DB doubles, HF halves)", 1.0,
     "DB doubles and HF halves exactly,x = 1/6 doubled by DB*,DB completes only for the doubling delay", 3},
    {2, "Po2 zero check", 1.0, "Po2 takes the power-of-two exit iff d = 0", 1},
    {3, "CM and gadget halting equivalence", 30.0, "halting equivalence with the interpreter", 1},
    {4, "time-bounded gadgets", 60.0, "time-bounded encodings stay within*,Up_2^Z elapses exactly 5 beta / 2", 2},
    {5, "region successors, partition and guards", 60.0,
     "successor chains match sampled exact evolution,regions partition a dense rational grid,"
     "guards are uniform on regions,region enumeration size and representatives",
     4},
    {6, "region RSM agrees with concrete search", 60.0, "region RSM matches concrete search:*", 3},
    {7, "contraction suite", 120.0,
     "contraction pipeline on random by-reference runs,a?b?a?b?a contracts to a?b?a,"
     "a?b?c?d?a?e?b?f is a fixpoint,the unbounded-context run is a contraction fixpoint",
     4},
    {8, "time-bounded reachability decision", 60.0,
     "decision agrees with explicit search on by-reference models,"
     "unbounded-context example restricted to two frames,the documented instance of the length bound",
     3},
};

}  // namespace

int main(int argc, char** argv) {
    bool all = true;
    for (const Criterion& c : kCriteria) {
        doctest::Context ctx;
        ctx.applyCommandLine(argc, argv);
        ctx.setOption("test-case", c.filter);
        ctx.setOption("no-intro", true);
        ctx.setOption("no-version", true);
        ctx.setOption("minimal", true);
        g_cases = 0;
        const auto t0 = std::chrono::steady_clock::now();
        const int rc = ctx.run();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool ok = rc == 0 && g_cases >= c.min_cases && secs < c.budget_s;
        all = all && ok;
        std::printf("%s criterion %d: %s (%d cases, %.2f s of %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.what,
                    g_cases, secs, c.budget_s);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
