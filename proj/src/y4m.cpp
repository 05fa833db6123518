#include "hfprep/y4m.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace hfprep {

namespace {

constexpr const char* kSignature = "YUV4MPEG2";

struct Header {
    int width = 0;
    int height = 0;
    int fps_num = 0;
    int fps_den = 0;
    PixLayout layout = PixLayout::YUV420;
    bool have_layout = false;
    size_t byte_len = 0; // header length including trailing '\n'
};

Header parse_header(const std::string& line, size_t line_len_with_nl) {
    Header h;
    h.byte_len = line_len_with_nl;
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok != kSignature)
        throw ParseError("not a YUV4MPEG2 file (signature '" + tok + "')", 0);

    size_t consumed = tok.size();
    while (ss >> tok) {
        // +1 for the separating space
        const size_t tok_off = consumed + 1;
        consumed = tok_off + tok.size();
        if (tok.empty()) continue;
        const std::string val = tok.substr(1);
        switch (tok[0]) {
            case 'W':
                h.width = std::atoi(val.c_str());
                if (h.width <= 0) throw ParseError("bad width tag '" + tok + "'", tok_off);
                break;
            case 'H':
                h.height = std::atoi(val.c_str());
                if (h.height <= 0) throw ParseError("bad height tag '" + tok + "'", tok_off);
                break;
            case 'F': {
                if (std::sscanf(val.c_str(), "%d:%d", &h.fps_num, &h.fps_den) != 2 ||
                    h.fps_num <= 0 || h.fps_den <= 0)
                    throw ParseError("bad frame rate tag '" + tok + "'", tok_off);
                break;
            }
            case 'C': {
                if (val == "420" || val == "420jpeg" || val == "420mpeg2" ||
                    val == "420paldv")
                    h.layout = PixLayout::YUV420;
                else if (val == "444")
                    h.layout = PixLayout::YUV444;
                else if (val == "mono")
                    h.layout = PixLayout::GRAY;
                else
                    throw ParseError("unsupported chroma tag '" + tok + "'", tok_off);
                h.have_layout = true;
                break;
            }
            case 'I':
            case 'A':
            case 'X':
                break; // interlace, aspect and extensions are ignored
            default:
                throw ParseError("unknown header tag '" + tok + "'", tok_off);
        }
    }
    if (h.width <= 0 || h.height <= 0)
        throw ParseError("header is missing W/H tags", 0);
    if (h.fps_num <= 0) { // F tag is optional in the wild; default 25/1
        h.fps_num = 25;
        h.fps_den = 1;
    }
    if (!h.have_layout) h.layout = PixLayout::YUV420; // container default
    return h;
}

const char* chroma_tag(PixLayout layout) {
    switch (layout) {
        case PixLayout::YUV420: return "420";
        case PixLayout::YUV444: return "444";
        case PixLayout::GRAY: return "mono";
        default: break;
    }
    throw InvalidArgument("layout " + to_string(layout) + " is not representable in y4m");
}

} // namespace

PlanarVideo load_y4m(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");

    std::string header_line;
    if (!std::getline(in, header_line))
        throw ParseError("empty file, no YUV4MPEG2 header", 0);
    Header h = parse_header(header_line, header_line.size() + 1);

    PlanarVideo video;
    video.width = h.width;
    video.height = h.height;
    video.fps_num = h.fps_num;
    video.fps_den = h.fps_den;
    video.pix_layout = h.layout;

    size_t offset = h.byte_len;
    std::vector<uint8_t> buf;
    std::string marker;
    while (std::getline(in, marker)) {
        const size_t marker_off = offset;
        if (marker.substr(0, 5) != "FRAME")
            throw ParseError("expected FRAME marker, got '" + marker.substr(0, 16) + "'",
                             marker_off);
        offset += marker.size() + 1;
        Frame frame;
        frame.layout = h.layout;
        const int np = plane_count(h.layout);
        for (int p = 0; p < np; ++p) {
            int pw, ph;
            plane_dims(h.layout, h.width, h.height, p, pw, ph);
            const size_t n = static_cast<size_t>(pw) * ph;
            buf.resize(n);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
            if (static_cast<size_t>(in.gcount()) != n)
                throw ParseError("truncated frame " + std::to_string(video.frames.size()) +
                                     " plane " + std::to_string(p) + ": wanted " +
                                     std::to_string(n) + " bytes, got " +
                                     std::to_string(in.gcount()),
                                 offset);
            Plane plane(pw, ph);
            for (size_t i = 0; i < n; ++i) plane.data[i] = static_cast<float>(buf[i]);
            offset += n;
            frame.planes.push_back(std::move(plane));
        }
        video.frames.push_back(std::move(frame));
    }
    validate_video(video);
    return video;
}

void write_y4m(const PlanarVideo& video, const std::string& path) {
    validate_video(video);
    const char* ctag = chroma_tag(video.pix_layout); // rejects RGB before touching disk

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");

    out << kSignature << " W" << video.width << " H" << video.height << " F"
        << video.fps_num << ":" << video.fps_den << " Ip A1:1 C" << ctag << "\n";

    std::vector<uint8_t> buf;
    for (size_t fi = 0; fi < video.frames.size(); ++fi) {
        out << "FRAME\n";
        const Frame& frame = video.frames[fi];
        for (size_t p = 0; p < frame.planes.size(); ++p) {
            const Plane& plane = frame.planes[p];
            buf.resize(plane.data.size());
            for (size_t i = 0; i < plane.data.size(); ++i) {
                const float v = plane.data[i];
                if (!std::isfinite(v))
                    throw InvalidArgument("non-finite sample in frame " + std::to_string(fi) +
                                          " plane " + std::to_string(p) + " index " +
                                          std::to_string(i));
                const float clipped = v < 0.0f ? 0.0f : (v > 255.0f ? 255.0f : v);
                buf[i] = static_cast<uint8_t>(std::lround(clipped));
            }
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(buf.size()));
        }
    }
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

PlanarVideo load_raw(const std::string& path, int width, int height, PixLayout layout,
                     int fps_num, int fps_den) {
    if (width <= 0 || height <= 0)
        throw InvalidArgument("raw input needs positive --size, got " + std::to_string(width) +
                              "x" + std::to_string(height));
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");

    size_t frame_bytes = 0;
    const int np = plane_count(layout);
    for (int p = 0; p < np; ++p) {
        int pw, ph;
        plane_dims(layout, width, height, p, pw, ph);
        frame_bytes += static_cast<size_t>(pw) * ph;
    }

    in.seekg(0, std::ios::end);
    const size_t total = static_cast<size_t>(in.tellg());
    in.seekg(0);
    if (total == 0 || total % frame_bytes != 0)
        throw ParseError("raw file size " + std::to_string(total) +
                             " is not a multiple of the frame size " +
                             std::to_string(frame_bytes),
                         total - total % frame_bytes);

    PlanarVideo video;
    video.width = width;
    video.height = height;
    video.fps_num = fps_num;
    video.fps_den = fps_den;
    video.pix_layout = layout;

    std::vector<uint8_t> buf;
    const size_t nframes = total / frame_bytes;
    for (size_t f = 0; f < nframes; ++f) {
        Frame frame;
        frame.layout = layout;
        for (int p = 0; p < np; ++p) {
            int pw, ph;
            plane_dims(layout, width, height, p, pw, ph);
            const size_t n = static_cast<size_t>(pw) * ph;
            buf.resize(n);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
            Plane plane(pw, ph);
            for (size_t i = 0; i < n; ++i) plane.data[i] = static_cast<float>(buf[i]);
            frame.planes.push_back(std::move(plane));
        }
        video.frames.push_back(std::move(frame));
    }
    return video;
}

} // namespace hfprep
