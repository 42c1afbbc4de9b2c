#include "slicerec/harness/container.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace srec {

namespace {

constexpr char kMagic[4] = {'S', '3', 'D', 'T'};
constexpr uint16_t kVersion = 1;

template <class T>
void append_le(std::vector<uint8_t>& out, T value) {
    for (size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<uint8_t>((static_cast<uint64_t>(value) >> (8 * i)) & 0xff));
}

template <class T>
T read_le(const std::vector<uint8_t>& in, size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw std::runtime_error("TensorContainer: truncated file");
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
    pos += sizeof(T);
    return static_cast<T>(v);
}

size_t dtype_size(TensorContainer::Dtype d) {
    return d == TensorContainer::Float32 ? 4 : 1;
}

}  // namespace

void TensorContainer::put_floats(const std::string& name, const std::vector<uint32_t>& shape,
                                 const float* data) {
    Entry e;
    e.dtype = Float32;
    e.shape = shape;
    e.payload.resize(e.element_count() * 4);
    std::memcpy(e.payload.data(), data, e.payload.size());
    entries_[name] = std::move(e);
}

void TensorContainer::put_bytes(const std::string& name, const std::vector<uint32_t>& shape,
                                const uint8_t* data) {
    Entry e;
    e.dtype = Uint8;
    e.shape = shape;
    e.payload.assign(data, data + e.element_count());
    entries_[name] = std::move(e);
}

void TensorContainer::put_string(const std::string& name, const std::string& text) {
    Entry e;
    e.dtype = Bytes;
    e.shape = {static_cast<uint32_t>(text.size())};
    e.payload.assign(text.begin(), text.end());
    entries_[name] = std::move(e);
}

const TensorContainer::Entry& TensorContainer::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::out_of_range("TensorContainer: no entry " + name);
    return it->second;
}

std::vector<float> TensorContainer::get_floats(const std::string& name) const {
    const Entry& e = entry(name);
    if (e.dtype != Float32) throw std::runtime_error("TensorContainer: " + name + " is not f32");
    std::vector<float> out(e.element_count());
    std::memcpy(out.data(), e.payload.data(), e.payload.size());
    return out;
}

std::vector<uint8_t> TensorContainer::get_bytes(const std::string& name) const {
    const Entry& e = entry(name);
    if (e.dtype != Uint8) throw std::runtime_error("TensorContainer: " + name + " is not u8");
    return e.payload;
}

std::string TensorContainer::get_string(const std::string& name) const {
    const Entry& e = entry(name);
    if (e.dtype != Bytes) throw std::runtime_error("TensorContainer: " + name + " is not a string");
    return std::string(e.payload.begin(), e.payload.end());
}

std::vector<std::string> TensorContainer::names() const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
}

std::vector<uint8_t> TensorContainer::serialize() const {
    // First pass to size the table, second pass fills offsets.
    std::vector<uint8_t> table;
    table.insert(table.end(), kMagic, kMagic + 4);
    append_le<uint16_t>(table, kVersion);
    append_le<uint32_t>(table, static_cast<uint32_t>(entries_.size()));

    size_t table_size = table.size();
    for (const auto& [name, e] : entries_)
        table_size += 2 + name.size() + 1 + 1 + 4 * e.shape.size() + 8 + 8;

    uint64_t offset = table_size;
    for (const auto& [name, e] : entries_) {
        append_le<uint16_t>(table, static_cast<uint16_t>(name.size()));
        table.insert(table.end(), name.begin(), name.end());
        table.push_back(static_cast<uint8_t>(e.dtype));
        table.push_back(static_cast<uint8_t>(e.shape.size()));
        for (uint32_t d : e.shape) append_le<uint32_t>(table, d);
        append_le<uint64_t>(table, offset);
        append_le<uint64_t>(table, e.payload.size());
        offset += e.payload.size();
    }
    for (const auto& [name, e] : entries_)
        table.insert(table.end(), e.payload.begin(), e.payload.end());
    return table;
}

TensorContainer TensorContainer::deserialize(const std::vector<uint8_t>& bytes) {
    size_t pos = 0;
    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw std::runtime_error("TensorContainer: bad magic");
    pos = 4;
    const uint16_t version = read_le<uint16_t>(bytes, pos);
    if (version != kVersion) throw std::runtime_error("TensorContainer: unsupported version");
    const uint32_t count = read_le<uint32_t>(bytes, pos);

    TensorContainer c;
    for (uint32_t i = 0; i < count; ++i) {
        const uint16_t name_len = read_le<uint16_t>(bytes, pos);
        if (pos + name_len > bytes.size()) throw std::runtime_error("TensorContainer: truncated");
        std::string name(bytes.begin() + pos, bytes.begin() + pos + name_len);
        pos += name_len;
        Entry e;
        e.dtype = static_cast<Dtype>(read_le<uint8_t>(bytes, pos));
        const uint8_t ndim = read_le<uint8_t>(bytes, pos);
        e.shape.resize(ndim);
        for (uint8_t d = 0; d < ndim; ++d) e.shape[d] = read_le<uint32_t>(bytes, pos);
        const uint64_t off = read_le<uint64_t>(bytes, pos);
        const uint64_t len = read_le<uint64_t>(bytes, pos);
        if (off + len > bytes.size()) throw std::runtime_error("TensorContainer: bad payload range");
        const size_t expect = e.dtype == Bytes ? e.shape[0] : e.element_count() * dtype_size(e.dtype);
        if (len != expect) throw std::runtime_error("TensorContainer: payload size mismatch");
        e.payload.assign(bytes.begin() + off, bytes.begin() + off + len);
        c.entries_[name] = std::move(e);
    }
    return c;
}

void TensorContainer::save(const std::string& path) const {
    const auto bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("TensorContainer: cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TensorContainer TensorContainer::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("TensorContainer: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace srec
