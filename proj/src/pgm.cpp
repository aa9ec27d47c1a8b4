#include "grasp/image.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "grasp/errors.hpp"

namespace grasp {

std::string encode_pgm(const Image& im) {
  const int h = image_height(im);
  const int w = image_width(im);
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) +
                    "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = im(y, x);
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      out.push_back(static_cast<char>(
          static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  return out;
}

namespace {

// Reads the next ASCII token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  if (tok.empty()) throw ParseError("pgm: missing field", what);
  for (char c : tok)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ParseError(std::string("pgm: non-numeric ") + what, tok);
  long v = std::stol(tok);
  if (v <= 0 || v > 1 << 16)
    throw ParseError(std::string("pgm: out-of-range ") + what, tok);
  return static_cast<int>(v);
}

}  // namespace

Image decode_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic = next_token(in);
  if (magic != "P5") throw ParseError("pgm: bad magic", magic);
  int w = parse_dim(next_token(in), "width");
  int h = parse_dim(next_token(in), "height");
  std::string maxval = next_token(in);
  if (maxval != "255") throw ParseError("pgm: unsupported maxval", maxval);
  // next_token consumed exactly one whitespace byte after the maxval.
  Image im(h, w);
  std::string px(static_cast<std::size_t>(w) * h, '\0');
  in.read(px.data(), static_cast<std::streamsize>(px.size()));
  if (in.gcount() != static_cast<std::streamsize>(px.size()))
    throw ParseError("pgm: truncated pixel block",
                     std::to_string(in.gcount()) + " of " +
                         std::to_string(px.size()) + " bytes");
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      im(y, x) =
          static_cast<double>(static_cast<unsigned char>(
              px[static_cast<std::size_t>(y) * w + x])) /
          255.0;
  return im;
}

void write_pgm(const std::filesystem::path& path, const Image& im) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for write: " + path.string());
  std::string bytes = encode_pgm(im);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write: " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for read: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_pgm(buf.str());
}

}  // namespace grasp
