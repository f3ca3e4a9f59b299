import os

from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or rep.when != "call" and outcome != "error":
                continue
            num, title = props["criterion"]
            status = "PASS" if outcome == "passed" else "FAIL"
            detail = props.get("detail", "")
            lines[num] = f"criterion {num:>2}: {status}  {title}  {detail}".rstrip()
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
