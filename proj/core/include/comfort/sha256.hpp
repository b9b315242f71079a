#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace comfort {

// Minimal SHA-256 (FIPS 180-4), used for run-manifest content hashes.
class Sha256 {
public:
    Sha256();

    void update(const void* data, std::size_t len);
    std::string hex_digest();  // finalizes; do not update afterwards

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint8_t buffer_[64];
    std::uint64_t total_bytes_ = 0;
    std::size_t buffer_len_ = 0;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace comfort
