#include "depthpoison/hashing.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <vector>

#include <openssl/evp.h>

#include "depthpoison/error.hpp"
#include "depthpoison/io.hpp"

namespace depthpoison {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error("SHA-256 init failed");
    }

    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
    }

    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw Error("SHA-256 final failed");
        static constexpr char kHex[] = "0123456789abcdef";
        std::string out;
        out.reserve(2 * len);
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(kHex[md[i] >> 4]);
            out.push_back(kHex[md[i] & 0xf]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_hex(std::string_view text) {
    Sha256 h;
    h.update(text.data(), text.size());
    return h.hex();
}

std::string tree_digest(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root.string());
    std::vector<std::string> rel;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), root).generic_string());
    }
    std::sort(rel.begin(), rel.end());
    Sha256 h;
    for (const auto& r : rel) {
        const auto bytes = io::read_file(root / r);
        const std::uint64_t n = bytes.size();
        h.update(r.data(), r.size() + 1);  // include the terminator as separator
        h.update(&n, sizeof n);
        h.update(bytes.data(), bytes.size());
    }
    return h.hex();
}

}  // namespace depthpoison
