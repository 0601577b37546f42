#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace optpred {

/// FNV-1a 64-bit over a file's bytes (manifest integrity tag, not crypto).
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hash_hex(std::uint64_t h);

/// A run directory with a manifest. Every output file is registered after it
/// is written; if the run is not finalized (a stage failed), the destructor
/// removes the partial outputs so reruns start clean. The manifest contains
/// no timestamps, keeping reruns byte-identical.
class RunWriter {
public:
    explicit RunWriter(std::filesystem::path dir);
    ~RunWriter();
    RunWriter(const RunWriter&) = delete;
    RunWriter& operator=(const RunWriter&) = delete;

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path(const std::string& name) const { return dir_ / name; }

    /// Config echo entries (stringified; shown verbatim in the manifest).
    void set_config(const std::string& key, const std::string& value);
    void set_config(const std::string& key, double value);
    void set_config(const std::string& key, std::int64_t value);

    /// Register an input the run consumed (hashed, never cleaned up).
    void add_input(const std::filesystem::path& file);
    /// Register an output written under dir() (hashed, cleaned up on failure).
    void add_output(const std::filesystem::path& file);

    /// Writes manifest.json; after this the outputs are permanent.
    void finalize();

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> config_;
    std::vector<std::pair<std::string, std::uint64_t>> inputs_;
    std::vector<std::pair<std::string, std::uint64_t>> outputs_;
    bool finalized_ = false;
};

}  // namespace optpred
