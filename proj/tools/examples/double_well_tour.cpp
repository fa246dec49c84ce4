// Splits a thermal wavepacket with the double-well protocol, first closed and
// then with both dissipators on, and prints the position profile at tau.

#include <wehrlsim/scenarios.hpp>

#include <cstdio>

using namespace wehrlsim;

namespace {

void show(const char* title, const RunResult& run) {
    const auto& last = run.rows.back();
    std::printf("%s  t=%.1f  S_Q=%.4f  C_l1=%.4f  peaks=%zu\n", title, last.time, last.S_Q, last.coherence_l1,
                profile_peaks(last.populations).size());
    for (double p : last.populations) {
        const int bar = static_cast<int>(p * 200);
        std::printf("  %6.4f %.*s\n", p, bar, "################################################################");
    }
}

} // namespace

int main() {
    auto iso = ScenarioConfig::defaults(Scenario::DoubleWellIsolated);
    iso.rates_every = 10; // entropy rates are the costly part; keep a few
    show("closed", run_doublewell(iso, true));

    auto open = ScenarioConfig::defaults(Scenario::DoubleWellCombined);
    open.rates_every = 10;
    show("gamma = Lambda = 0.5", run_doublewell(open, false));
}
