// Acceptance suite: runs each acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kninst/corpus.hpp"
#include "kninst/integrator.hpp"
#include "kninst/verify.hpp"

using namespace kninst;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion, name,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string suite_detail(const SuiteResult& s, double secs) {
    std::ostringstream os;
    os << (s.checks - s.failures) << "/" << s.checks << " checks, max_err "
       << format_double(s.max_err) << ", " << format_double(secs) << " s";
    return os.str();
}

}  // namespace

int main() {
    const std::uint64_t seed = 20250808ull;

    // 1. Frame-identity suite: six inner-product identities, the (t,phi)
    //    determinant identity, and the Maxwell cancellation, to 1e-11 on
    //    1e4 random draws, under 5 s.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::frame_identities(10000, seed + 1);
        const double secs = seconds_since(t0);
        report(1, "frame identities at 1e-11 on 1e4 draws",
               s.passed() && secs < 5.0, suite_detail(s, secs));
    }

    // 2. Carter consistency: dual-form K agreement to 1e-10 and separation
    //    residuals <= 1e-10 on 1e4 random tangent states, under 5 s.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::carter_consistency(10000, seed + 2);
        const double secs = seconds_since(t0);
        report(2, "Carter dual-form and separation residuals at 1e-10",
               s.passed() && secs < 5.0, suite_detail(s, secs));
    }

    // 3. Special-value identities: Theta(pi/2) = Q and
    //    R(0) = (a^2+e^2) Q + e^2 Xi^2 (Lz-aE)^2 to 1e-12.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::special_values(10000, seed + 3);
        report(3, "special values at 1e-12", s.passed(), suite_detail(s, seconds_since(t0)));
    }

    // 4. Root-structure oracle: discriminant-predicted counts match the
    //    companion-matrix counts on >= 99.9% of draws outside the guard
    //    band; AdS small-|Lambda| draws give two real roots straddling 0;
    //    the dS negative-root census prints as a diagnostic. Under 10 s.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::root_structure(10000, seed + 4);
        const double secs = seconds_since(t0);
        report(4, "root-structure oracle agreement", s.passed() && secs < 10.0,
               suite_detail(s, secs));
        for (const auto& d : s.diagnostics) std::printf("    %s\n", d.c_str());
    }

    // 5. Theta-horizon law on 1e3 dS draws: existence iff a > sqrt(3/Lambda)
    //    and cos^2(theta_-+) = 1/(L a^2) to 1e-12.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::theta_horizon_law(1000, seed + 5);
        report(5, "theta-horizon law at 1e-12", s.passed(), suite_detail(s, seconds_since(t0)));
    }

    // 6. Potential suite: V(pi/2) = 0, Q = T + V to 1e-10, closed-form
    //    dV/dtheta against finite differences to 1e-6, AdS profiles with
    //    Lz != 0 have 1 or 3 roots satisfying the root condition, and Psi
    //    has no zero where Delta_theta < 0.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::potential_checks(2000, seed + 6);
        report(6, "colatitude potential suite", s.passed(), suite_detail(s, seconds_since(t0)));
        for (const auto& d : s.diagnostics) std::printf("    %s\n", d.c_str());
    }

    // 7. Lazy-particle signs: the AdS tables reproduced in all cells with
    //    the Omega-interior and r^2 < a^2 negations; the dS comparison is
    //    emitted with mismatches flagged, not asserted.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::lazy_particle_signs();
        report(7, "lazy-particle sign tables (AdS asserted, dS diagnostic)", s.passed(),
               suite_detail(s, seconds_since(t0)));
        for (const auto& d : s.diagnostics) std::printf("    %s\n", d.c_str());
    }

    // 8. Integration: on the seed corpus both modes keep the four first
    //    integrals within 1e-8 relative drift at rel_tol 1e-10 over spans
    //    of 1e3 mass-times, agree to 1e-6 at the final state, keep
    //    equatorial principal seeds on the equator to 1e-9, and
    //    forward-backward integration returns to the seed within 1e-6.
    //    Under 30 s total.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const SuiteResult s = suites::integrator_checks();
        const double secs = seconds_since(t0);
        report(8, "dual-mode integration on the seed corpus", s.passed() && secs < 30.0,
               suite_detail(s, secs));
        for (const auto& d : s.diagnostics) std::printf("    %s\n", d.c_str());
    }

    // 9. Determinism: repeated verify and sweep runs with fixed seeds
    //    produce byte-identical outputs.
    {
        const auto t0 = std::chrono::steady_clock::now();
        const fs::path base = fs::temp_directory_path() / "kninst_acceptance";
        fs::remove_all(base);
        fs::create_directories(base);
        const std::string cli = KNINST_CLI_PATH;
        bool ok = true;
        std::string detail;
        auto shell = [&](const std::string& cmd) {
            const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
            return WEXITSTATUS(rc);
        };
        const std::string vflags = " verify --quick --seed 99 --out ";
        const int v1 = shell(cli + vflags + (base / "v1").string());
        const int v2 = shell(cli + vflags + (base / "v2").string());
        ok = ok && v1 == 0 && v2 == 0;
        if (ok && slurp(base / "v1" / "verify.json") != slurp(base / "v2" / "verify.json")) {
            ok = false;
            detail = "verify.json differs between runs";
        }
        const std::string sflags =
            " sweep --sub roots --vary a=0:0.4:3 --vary e=0:0.2:2 -M 1 --Lambda 0.03 "
            "--seed 99 --jobs 3 --out ";
        const int s1 = shell(cli + sflags + (base / "s1").string());
        const int s2 = shell(cli + sflags + (base / "s2").string());
        ok = ok && s1 == 0 && s2 == 0;
        if (ok) {
            for (const auto& entry : fs::directory_iterator(base / "s1")) {
                const auto name = entry.path().filename();
                if (slurp(entry.path()) != slurp(base / "s2" / name)) {
                    ok = false;
                    detail = "sweep output " + name.string() + " differs";
                    break;
                }
            }
        }
        std::ostringstream os;
        os << (detail.empty() ? "byte-identical" : detail) << ", "
           << format_double(seconds_since(t0)) << " s";
        report(9, "determinism of verify and sweep outputs", ok, os.str());
    }

    std::printf("%s (%d criteria failed)\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                g_failures);
    return g_failures;
}
