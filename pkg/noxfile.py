import nox

PYTHONS = ["3.8", "3.9", "3.10", "3.11"]


@nox.session
def lint(session: nox.Session) -> None:
    session.install("ruff")
    session.run("ruff", "streamsplat")


@nox.session(python=PYTHONS)
def test(session: nox.Session) -> None:
    session.install(".")
    session.install("pytest")
    session.install("pytest-cov")
    session.install("pytest-timeout")

    session.run("pytest", "-vv", "-m", "not integration and not acceptance", "test")


@nox.session(python=PYTHONS)
def mypy(session: nox.Session) -> None:
    session.install(".")
    session.install("mypy", "types-PyYAML", "types-Pillow")
    session.run("mypy", "--strict", "streamsplat")


@nox.session(python=PYTHONS)
def test_integration(session: nox.Session) -> None:
    session.install(".")
    session.install("pytest", "pytest-timeout")

    session.run("pytest", "-vv", "-m", "integration", "test")


@nox.session(python=PYTHONS[-1])
def test_acceptance(session: nox.Session) -> None:
    session.install(".")
    session.install("pytest", "pytest-timeout")

    session.run("pytest", "-vv", "-m", "acceptance", "test")


nox.options.sessions = ["lint", "test", "mypy"]
