#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <string>

#include "comfort/types.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("comfort_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline comfort::FusedRecord make_record(const std::string& occupant, const std::string& vote_id,
                                        std::int64_t t, const std::string& zone, int thermal = 1,
                                        int light = 1, int noise = 1) {
    comfort::FusedRecord rec;
    rec.vote.vote_id = vote_id;
    rec.vote.occupant_id = occupant;
    rec.vote.timestamp = comfort::Instant{t};
    rec.vote.thermal = thermal;
    rec.vote.light = light;
    rec.vote.noise = noise;
    rec.zone_id = zone;
    rec.vote.zone_id = zone;
    return rec;
}

inline comfort::FusedRecord with_env(comfort::FusedRecord rec, double temp, double rh = 55,
                                     double db = 40, double lux = 300) {
    rec.env = comfort::EnvMatch{temp, rh, db, lux, "s", 0};
    return rec;
}

struct CliResult {
    int exit_code = -1;
    std::string output;
};

// Runs a command capturing stdout+stderr.
inline CliResult run_command(const std::string& command) {
    CliResult result;
    FILE* pipe = ::popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) result.output.append(buf, n);
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace testutil
