#!/usr/bin/env python3

"""Script that releases a new version of robustlr."""

from releaser import Releaser
from releaser.steps import (
    CheckRstFiles,
    InteractivelyApprovePackage,
    SetFutureVersion,
    SetVersionNumberInteractively,
    Shell,
    Warn,
)
from releaser.git_steps import (
    EnsureGitBranch,
    EnsureGitClean,
    GitCommitVersionNumber,
    GitPush,
    GitPushTags,
    GitTag,
)

config = dict(
    github_user="nandoflorestan",
    github_repository="robustlr",
    branch="master",  # Only release new versions in this git branch
    changes_file=None,
    version_file="pyproject.toml",  # Read and write version number on this file
    version_keyword="version",
    log_file="release.log.utf-8.tmp",
    verbosity="info",  # debug | info | warn | error
)

Releaser(
    config,
    # Checks. The slow tests run Monte Carlo scans; they take minutes.
    Shell("py.test -s --tb=native tests/fast"),
    Shell("py.test -s --tb=native tests/slow"),
    CheckRstFiles("README.rst", "ROADMAP.rst", "docs/LICENSE.rst"),
    EnsureGitClean,
    EnsureGitBranch,
    # Release
    SetVersionNumberInteractively,
    Shell("./build_sphinx_documentation.sh"),
    Shell("poetry build"),
    InteractivelyApprovePackage,
    GitCommitVersionNumber,
    GitTag,
    Shell("poetry publish"),
    # Post-release: set development version and push
    SetFutureVersion,
    GitCommitVersionNumber("future_version", msg="Bump version to {0} after release"),
    GitPush,  # Cannot be undone. If successful, previous steps won't roll back
    GitPushTags,
    Warn("Do not forget to upload the documentation now!"),
).release()
