#pragma once

#include <string>

#include "hfprep/video.hpp"

namespace hfprep {

// Decodes a YUV4MPEG2 file into float planes. No chroma resampling is
// performed; planes are stored as the container delivers them.
// Throws ParseError (with byte offset) on malformed headers, unsupported
// chroma tags, or truncated frame payloads.
PlanarVideo load_y4m(const std::string& path);

// Writes an 8-bit YUV4MPEG2 file. Samples are clipped to [0, 255] and
// rounded half-away-from-zero. Throws on unwritable paths and non-finite
// samples. load_y4m(write_y4m(v)) reproduces the clipped/rounded video
// exactly.
void write_y4m(const PlanarVideo& video, const std::string& path);

// Reads a headerless planar 8-bit file (CLI --raw path). The frame count
// is derived from the file size, which must be a whole number of frames.
PlanarVideo load_raw(const std::string& path, int width, int height,
                     PixLayout layout, int fps_num, int fps_den);

} // namespace hfprep
