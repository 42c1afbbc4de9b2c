#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace srec {

// Chunked binary tensor container.
//
// Layout (little-endian):
//   magic "S3DT" | version u16 | entry count u32
//   per entry: name (u16 length + bytes) | dtype u8 | ndim u8 |
//              dims u32 each | payload offset u64 | payload bytes u64
//   payload blob
//
// Round-trips float32 and uint8 arrays bit-exactly; entries addressable by
// name. Also carries string entries (dtype 2) for JSON headers.
class TensorContainer {
public:
    enum Dtype : uint8_t { Float32 = 0, Uint8 = 1, Bytes = 2 };

    struct Entry {
        Dtype dtype = Float32;
        std::vector<uint32_t> shape;
        std::vector<uint8_t> payload;

        size_t element_count() const {
            size_t n = 1;
            for (uint32_t d : shape) n *= d;
            return n;
        }
    };

    void put_floats(const std::string& name, const std::vector<uint32_t>& shape,
                    const float* data);
    void put_bytes(const std::string& name, const std::vector<uint32_t>& shape,
                   const uint8_t* data);
    void put_string(const std::string& name, const std::string& text);

    bool contains(const std::string& name) const { return entries_.count(name) > 0; }
    const Entry& entry(const std::string& name) const;
    std::vector<float> get_floats(const std::string& name) const;
    std::vector<uint8_t> get_bytes(const std::string& name) const;
    std::string get_string(const std::string& name) const;
    std::vector<std::string> names() const;

    void save(const std::string& path) const;
    static TensorContainer load(const std::string& path);

    std::vector<uint8_t> serialize() const;
    static TensorContainer deserialize(const std::vector<uint8_t>& bytes);

private:
    std::map<std::string, Entry> entries_;
};

}  // namespace srec
