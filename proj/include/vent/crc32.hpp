#ifndef VENT_CRC32_HPP
#define VENT_CRC32_HPP

#include <cstddef>
#include <cstdint>

namespace vent {

// Rolling CRC-32 (IEEE 802.3, poly 0xEDB88320), same convention as zlib.
class Crc32 {
public:
    Crc32() { init_table(); }

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i)
            crc_ = table_[(crc_ ^ p[i]) & 0xFFu] ^ (crc_ >> 8);
    }

    std::uint32_t value() const { return crc_ ^ 0xFFFFFFFFu; }

    static std::uint32_t of(const void* data, std::size_t n) {
        Crc32 c;
        c.update(data, n);
        return c.value();
    }

private:
    static void init_table() {
        if (table_ready_) return;
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table_[i] = c;
        }
        table_ready_ = true;
    }

    std::uint32_t crc_ = 0xFFFFFFFFu;
    static inline std::uint32_t table_[256];
    static inline bool table_ready_ = false;
};

}  // namespace vent

#endif
