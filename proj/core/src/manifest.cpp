#include "optpred/manifest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "optpred/csv.hpp"

namespace optpred {

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot hash missing file: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunWriter::RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

RunWriter::~RunWriter() {
    if (finalized_) return;
    std::error_code ec;
    for (const auto& [name, hash] : outputs_) std::filesystem::remove(dir_ / name, ec);
    std::filesystem::remove(dir_ / "manifest.json", ec);
}

void RunWriter::set_config(const std::string& key, const std::string& value) {
    config_[key] = value;
}

void RunWriter::set_config(const std::string& key, double value) {
    config_[key] = fmt_double(value);
}

void RunWriter::set_config(const std::string& key, std::int64_t value) {
    config_[key] = std::to_string(value);
}

void RunWriter::add_input(const std::filesystem::path& file) {
    inputs_.emplace_back(file.string(), hash_file(file));
}

void RunWriter::add_output(const std::filesystem::path& file) {
    outputs_.emplace_back(std::filesystem::relative(file, dir_).string(), hash_file(file));
}

void RunWriter::finalize() {
    nlohmann::json j;
    j["tool"] = "optpred";
    j["config"] = config_;
    auto files = nlohmann::json::object();
    for (const auto& [name, hash] : inputs_) files["input:" + name] = hash_hex(hash);
    for (const auto& [name, hash] : outputs_) files[name] = hash_hex(hash);
    j["files"] = std::move(files);

    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + dir_.string());
    out << j.dump(2) << '\n';
    finalized_ = true;
}

}  // namespace optpred
