"""Shared test wiring.

After a run that included the acceptance module, print one verdict line
per acceptance criterion so the outcome is readable at a glance.
"""

CRITERIA = [
    ("bench_500", "500-object bench: mean unit compute <= 30 ms, bench <= 60 s"),
    ("demo_property", "demo cue VERIFIED under 10 s; delay-9 mutant REFUTED with"
                      " replayable counterexample"),
    ("compiler_oracle", "compiled message traces byte-identical to the"
                        " simulation oracle across the corpus"),
    ("store_oracle", "entailment exact vs enumeration on 1000 random stores;"
                     " 1000 monotonicity triples"),
    ("ntcc_laws", "process laws hold on 200+ random cases each;"
                  " deterministic steps byte-reproducible"),
    ("verifier_exhaustiveness", "checker verdicts equal brute-force enumeration;"
                                " for-all/exists duality over the property corpus"),
    ("determinism_replay", "every verdict's evidence replays through the"
                           " runtime; traces invariant under period changes"),
]

# populated by test_acceptance at run time with human-readable measurements
DETAILS: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            for key, _ in CRITERIA:
                if f"test_{key}" in nodeid:
                    if outcomes.get(key) != "failed":
                        outcomes[key] = "failed" if status != "passed" else status
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, label in CRITERIA:
        status = outcomes.get(key)
        verdict = {"passed": "PASS", None: "NOT RUN"}.get(status, "FAIL")
        detail = DETAILS.get(key)
        suffix = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"{verdict:7s} {label}{suffix}")
