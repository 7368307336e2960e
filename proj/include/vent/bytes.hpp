#ifndef VENT_BYTES_HPP
#define VENT_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "vent/errors.hpp"

namespace vent {

// Little-endian buffer writer/reader shared by the dataset and checkpoint
// formats. The reader reports the byte offset of any truncation.
class ByteWriter {
public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        unsigned char tmp[sizeof(T)];
        std::memcpy(tmp, &v, sizeof(T));
        buf_.insert(buf_.end(), tmp, tmp + sizeof(T));
    }
    void put_bytes(const void* p, std::size_t n) {
        const auto* c = static_cast<const unsigned char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }
    void put_string(const std::string& s) { put_bytes(s.data(), s.size()); }

    const std::vector<unsigned char>& bytes() const { return buf_; }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    ByteReader(const void* data, std::size_t size)
        : p_(static_cast<const unsigned char*>(data)), size_(size) {}

    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, p_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    void get_bytes(void* out, std::size_t n) {
        need(n);
        std::memcpy(out, p_ + pos_, n);
        pos_ += n;
    }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > size_)
            throw DataFormatError(DataFormatError::Kind::truncated,
                                  "file truncated at byte " + std::to_string(size_) + " (needed " +
                                      std::to_string(n) + " more at offset " +
                                      std::to_string(pos_) + ")",
                                  static_cast<long>(pos_));
    }

    const unsigned char* p_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace vent

#endif
