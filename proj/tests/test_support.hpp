#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

// Shared scaffolding for the test binaries: unique scratch directories,
// small file helpers, and a runner for the command-line tool.

namespace testsupport {

namespace fs = std::filesystem;

// Scratch directory removed on scope exit.
struct TempDir {
    fs::path path;

    TempDir() {
        static std::mt19937_64 names(std::random_device{}());
        path = fs::temp_directory_path() /
               ("reduxcorr_test_" + std::to_string(names()) + "_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str(const std::string& child = "") const {
        return child.empty() ? path.string() : (path / child).string();
    }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw std::runtime_error("test: cannot write " + path);
    file << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("test: cannot read " + path);
    std::ostringstream out;
    out << file.rdbuf();
    return out.str();
}

// Runs the built CLI with the given argument string; returns its exit code.
// Output is silenced unless REDUXCORR_TEST_VERBOSE is set.
inline int run_cli(const std::string& args) {
#ifdef REDUXCORR_CLI_PATH
    std::string cmd = std::string(REDUXCORR_CLI_PATH) + " " + args;
    if (std::getenv("REDUXCORR_TEST_VERBOSE") == nullptr) cmd += " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) throw std::runtime_error("test: cannot spawn " + cmd);
    return WEXITSTATUS(rc);
#else
    (void)args;
    throw std::runtime_error("test: built without REDUXCORR_CLI_PATH");
#endif
}

}  // namespace testsupport
