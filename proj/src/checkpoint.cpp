#include "hfprep/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace hfprep {

namespace {

constexpr char kMagic[4] = {'F', 'F', 'P', 'N'};
constexpr uint32_t kVersion = 1;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (pos + n > buf.size())
            throw ParseError(std::string("checkpoint truncated reading ") + what, pos);
    }
    uint16_t u16(const char* what) {
        need(2, what);
        uint16_t v = static_cast<uint8_t>(buf[pos]) |
                     (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64(const char* what) {
        need(8, what);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    float f32(const char* what) {
        uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

} // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        if (t.name.size() > UINT16_MAX)
            throw InvalidArgument("tensor name too long: " + t.name.substr(0, 32));
        put_u16(out, static_cast<uint16_t>(t.name.size()));
        out.append(t.name);
        if (t.shape.size() > 255)
            throw InvalidArgument("tensor '" + t.name + "' has too many dims");
        out.push_back(static_cast<char>(t.shape.size()));
        int64_t n = 1;
        for (int d : t.shape) {
            if (d < 0) throw InvalidArgument("tensor '" + t.name + "' has negative dim");
            put_u32(out, static_cast<uint32_t>(d));
            n *= d;
        }
        if (static_cast<size_t>(n) != t.data.size())
            throw InvalidArgument("tensor '" + t.name + "' data/shape mismatch");
        for (float v : t.data) put_f32(out, v);
    }
    put_u64(out, out.size());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    f.flush();
    if (!f) throw Error("write to '" + path + "' failed");
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for reading");
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf};
    r.need(4, "magic");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw ParseError("bad checkpoint magic", 0);
    r.pos = 4;
    const uint32_t version = r.u32("version");
    if (version != kVersion)
        throw ParseError("unsupported checkpoint version " + std::to_string(version), 4);
    const uint32_t count = r.u32("tensor count");

    ModelCheckpoint ckpt;
    ckpt.tensors.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        ModelCheckpoint::Entry e;
        const uint16_t name_len = r.u16("name length");
        r.need(name_len, "name");
        e.name.assign(buf, r.pos, name_len);
        r.pos += name_len;
        r.need(1, "ndims");
        const int ndims = static_cast<uint8_t>(buf[r.pos++]);
        int64_t n = 1;
        for (int d = 0; d < ndims; ++d) {
            e.shape.push_back(static_cast<int>(r.u32("dim")));
            n *= e.shape.back();
        }
        e.data.resize(static_cast<size_t>(n));
        r.need(static_cast<size_t>(n) * 4, "tensor data");
        for (int64_t k = 0; k < n; ++k) e.data[static_cast<size_t>(k)] = r.f32("sample");
        ckpt.tensors.push_back(std::move(e));
    }
    const size_t body_len = r.pos;
    const uint64_t checksum = r.u64("checksum");
    if (checksum != body_len)
        throw ParseError("checkpoint length checksum mismatch: recorded " +
                             std::to_string(checksum) + ", actual " +
                             std::to_string(body_len),
                         body_len);
    if (r.pos != buf.size())
        throw ParseError("trailing bytes after checkpoint checksum", r.pos);
    return ckpt;
}

} // namespace hfprep
