#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tdad/compiler.hpp"
#include "tdad/fixture.hpp"
#include "tdad/test_model.hpp"

namespace tdad {

namespace fs = std::filesystem;

// On-disk layout. Visible and hidden tests live in separate trees so
// isolation applies at the directory level:
//
//   <root>/tests_visible/<slug>/_suite.yaml + <test_id>.yaml
//   <root>/tests_hidden/<slug>/_suite.yaml + <test_id>.yaml
//   <root>/fixtures/<slug>/<fixture_set_id>.yaml
//   <root>/agent_artifacts/<slug>/<hash>.json     (content-addressed)
//   <root>/reports/
struct Workspace {
    fs::path root;

    explicit Workspace(fs::path root_path) : root(std::move(root_path)) {}

    fs::path visible_dir(const std::string& slug) const;
    fs::path hidden_dir(const std::string& slug) const;
    fs::path fixtures_dir(const std::string& slug) const;
    fs::path artifacts_dir(const std::string& slug) const;
    fs::path reports_dir() const;

    void ensure_layout(const std::string& slug) const;
};

std::string suite_slug(const std::string& spec_id, int version);

// Materialize a generated suite: visible tests into the visible tree, hidden
// into the hidden tree, one YAML file per test, plus a _suite.yaml manifest
// per tree and fixture files. Existing trees for the slug are replaced.
void materialize_suite(const Workspace& ws, const std::string& slug, const Suite& suite,
                       const std::vector<FixtureSet>& fixtures);

// Load one visibility tree. Loading the visible tree never opens the hidden
// tree and vice versa. Tests whose file-level visibility contradicts the
// tree they sit in raise IsolationViolation.
Suite load_suite_tree(const fs::path& tree_dir, Visibility expected);

std::vector<FixtureSet> load_fixture_sets(const fs::path& fixtures_dir);
FixtureStore load_fixture_store(const fs::path& fixtures_dir);

// Content-addressed artifact persistence: writing the same artifact twice
// lands on the same path with identical bytes, so reruns never clobber
// anything.
fs::path store_artifact(const Workspace& ws, const std::string& slug,
                        const PromptArtifact& artifact);
PromptArtifact load_artifact(const fs::path& path);

// RAII guard over the compile sandbox: the visible tree (and fixtures) are
// made read-only and the hidden tree unreadable for the guard's lifetime;
// destruction restores both. Mirrors the separate-mount isolation contract
// with filesystem permissions.
class CompilationSandbox {
public:
    CompilationSandbox(fs::path visible_dir, fs::path hidden_dir, fs::path fixtures_dir);
    ~CompilationSandbox();

    CompilationSandbox(const CompilationSandbox&) = delete;
    CompilationSandbox& operator=(const CompilationSandbox&) = delete;

    // Permission state probes for audits.
    static bool tree_write_protected(const fs::path& dir);
    static bool tree_unreadable(const fs::path& dir);

private:
    fs::path visible_dir_;
    fs::path hidden_dir_;
    fs::path fixtures_dir_;
    std::vector<std::pair<fs::path, fs::perms>> restore_;
};

}  // namespace tdad
