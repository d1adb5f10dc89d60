#include "tdad/workspace.hpp"

#include <algorithm>

#include "tdad/errors.hpp"
#include "tdad/util.hpp"

namespace tdad {

fs::path Workspace::visible_dir(const std::string& slug) const {
    return root / "tests_visible" / slug;
}
fs::path Workspace::hidden_dir(const std::string& slug) const {
    return root / "tests_hidden" / slug;
}
fs::path Workspace::fixtures_dir(const std::string& slug) const {
    return root / "fixtures" / slug;
}
fs::path Workspace::artifacts_dir(const std::string& slug) const {
    return root / "agent_artifacts" / slug;
}
fs::path Workspace::reports_dir() const { return root / "reports"; }

void Workspace::ensure_layout(const std::string& slug) const {
    fs::create_directories(visible_dir(slug));
    fs::create_directories(hidden_dir(slug));
    fs::create_directories(fixtures_dir(slug));
    fs::create_directories(artifacts_dir(slug));
    fs::create_directories(reports_dir());
}

std::string suite_slug(const std::string& spec_id, int version) {
    return spec_id + "-v" + std::to_string(version);
}

static void write_tree(const fs::path& dir, const Suite& suite, Visibility visibility) {
    fs::remove_all(dir);
    fs::create_directories(dir);

    Suite manifest = suite;  // header only; tests live in their own files
    manifest.tests.clear();
    json manifest_json = manifest.to_json();
    manifest_json.erase("tests");
    manifest_json["visibility"] = to_string(visibility);
    write_file((dir / "_suite.yaml").string(), json_to_yaml(manifest_json));

    for (const auto& t : suite.tests) {
        if (t.visibility != visibility) continue;
        write_file((dir / (t.test_id + ".yaml")).string(), json_to_yaml(t.to_json()));
    }
}

void materialize_suite(const Workspace& ws, const std::string& slug, const Suite& suite,
                       const std::vector<FixtureSet>& fixtures) {
    ws.ensure_layout(slug);
    write_tree(ws.visible_dir(slug), suite, Visibility::visible);
    write_tree(ws.hidden_dir(slug), suite, Visibility::hidden);

    fs::path fx_dir = ws.fixtures_dir(slug);
    fs::remove_all(fx_dir);
    fs::create_directories(fx_dir);
    for (const auto& fx : fixtures)
        write_file((fx_dir / (fx.fixture_set_id + ".yaml")).string(), fx.to_yaml());
}

Suite load_suite_tree(const fs::path& tree_dir, Visibility expected) {
    fs::path manifest_path = tree_dir / "_suite.yaml";
    if (!fs::exists(manifest_path))
        throw ConfigError("no suite manifest at " + manifest_path.string());

    json manifest = yaml_to_json(read_file(manifest_path.string()));
    Suite suite;
    suite.spec_id = manifest.value("spec_id", "");
    suite.spec_version = manifest.value("spec_version", 1);
    suite.mode = manifest.value("mode", "benchmark") == "production" ? SuiteMode::production
                                                                     : SuiteMode::benchmark;
    if (manifest.contains("generation_seed") && !manifest["generation_seed"].is_null())
        suite.generation_seed = manifest["generation_seed"].get<std::uint64_t>();

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(tree_dir)) {
        if (!entry.is_regular_file()) continue;
        std::string name = entry.path().filename().string();
        if (name.starts_with("_") || !name.ends_with(".yaml")) continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<std::string> misplaced;
    for (const auto& file : files) {
        TestCase t = TestCase::from_json(yaml_to_json(read_file(file.string())), file.string());
        if (t.visibility != expected) misplaced.push_back(t.test_id);
        suite.tests.push_back(std::move(t));
    }
    if (!misplaced.empty())
        throw IsolationViolation("tests in the " + std::string(to_string(expected)) +
                                 " tree carry a different visibility: " + join(misplaced, ", "));
    return suite;
}

std::vector<FixtureSet> load_fixture_sets(const fs::path& fixtures_dir) {
    std::vector<fs::path> files;
    if (fs::exists(fixtures_dir))
        for (const auto& entry : fs::directory_iterator(fixtures_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".yaml")
                files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<FixtureSet> out;
    for (const auto& file : files)
        out.push_back(FixtureSet::from_yaml(read_file(file.string())));
    return out;
}

FixtureStore load_fixture_store(const fs::path& fixtures_dir) {
    FixtureStore store;
    for (auto& fx : load_fixture_sets(fixtures_dir)) store.add(std::move(fx));
    return store;
}

fs::path store_artifact(const Workspace& ws, const std::string& slug,
                        const PromptArtifact& artifact) {
    fs::path dir = ws.artifacts_dir(slug);
    fs::create_directories(dir);
    fs::path path = dir / (artifact_hash(artifact) + ".json");
    write_file(path.string(), artifact.to_json().dump(2) + "\n");
    return path;
}

PromptArtifact load_artifact(const fs::path& path) {
    return PromptArtifact::from_json(json::parse(read_file(path.string())));
}

// -- sandbox -----------------------------------------------------------------------

CompilationSandbox::CompilationSandbox(fs::path visible_dir, fs::path hidden_dir,
                                       fs::path fixtures_dir)
    : visible_dir_(std::move(visible_dir)),
      hidden_dir_(std::move(hidden_dir)),
      fixtures_dir_(std::move(fixtures_dir)) {
    const fs::perms read_only =
        fs::perms::owner_read | fs::perms::group_read | fs::perms::others_read;
    const fs::perms read_only_dir = read_only | fs::perms::owner_exec | fs::perms::group_exec |
                                    fs::perms::others_exec;

    auto lock_read_only = [&](const fs::path& dir) {
        if (dir.empty() || !fs::exists(dir)) return;
        std::vector<fs::path> paths{dir};
        for (const auto& entry : fs::recursive_directory_iterator(dir))
            paths.push_back(entry.path());
        for (const auto& path : paths)
            restore_.emplace_back(path, fs::status(path).permissions());
        for (const auto& path : paths)
            fs::permissions(path, fs::is_directory(path) ? read_only_dir : read_only,
                            fs::perm_options::replace);
    };
    lock_read_only(visible_dir_);
    lock_read_only(fixtures_dir_);

    // The hidden tree is not merely write-protected, it is unreadable for the
    // whole compilation.
    if (!hidden_dir_.empty() && fs::exists(hidden_dir_)) {
        restore_.emplace_back(hidden_dir_, fs::status(hidden_dir_).permissions());
        fs::permissions(hidden_dir_, fs::perms::none, fs::perm_options::replace);
    }
}

CompilationSandbox::~CompilationSandbox() {
    // Restore in reverse so parent directories regain traverse first.
    for (auto it = restore_.rbegin(); it != restore_.rend(); ++it) {
        std::error_code ec;
        fs::permissions(it->first, it->second, fs::perm_options::replace, ec);
    }
}

bool CompilationSandbox::tree_write_protected(const fs::path& dir) {
    if (!fs::exists(dir)) return false;
    auto writable = [](const fs::path& p) {
        fs::perms perms_value = fs::status(p).permissions();
        return (perms_value & (fs::perms::owner_write | fs::perms::group_write |
                               fs::perms::others_write)) != fs::perms::none;
    };
    if (writable(dir)) return false;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (writable(entry.path())) return false;
    return true;
}

bool CompilationSandbox::tree_unreadable(const fs::path& dir) {
    if (!fs::exists(dir)) return true;
    fs::perms perms_value = fs::status(dir).permissions();
    return perms_value == fs::perms::none;
}

}  // namespace tdad
