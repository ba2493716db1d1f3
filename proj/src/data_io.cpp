#include "lsbound/data_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lsbound/errors.hpp"

namespace lsbound {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803u;
constexpr std::uint32_t kLabelsMagic = 0x00000801u;

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("idx: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint32_t read_be32(const std::string& blob, std::size_t& pos, const std::string& path) {
  if (pos + 4 > blob.size()) throw format_error("idx: truncated file " + path);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v = (v << 8) | static_cast<std::uint8_t>(blob[pos + static_cast<std::size_t>(i)]);
  pos += 4;
  return v;
}

void write_be32(std::string& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

}  // namespace

IdxDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  const std::string images = read_binary(images_path);
  const std::string labels = read_binary(labels_path);

  std::size_t ipos = 0;
  const std::uint32_t imagic = read_be32(images, ipos, images_path);
  if (imagic != kImagesMagic)
    throw format_error("idx: bad images magic " + hex32(imagic) + " in " + images_path +
                       " (expected " + hex32(kImagesMagic) + ")");
  const std::uint32_t count = read_be32(images, ipos, images_path);
  const std::uint32_t rows = read_be32(images, ipos, images_path);
  const std::uint32_t cols = read_be32(images, ipos, images_path);

  std::size_t lpos = 0;
  const std::uint32_t lmagic = read_be32(labels, lpos, labels_path);
  if (lmagic != kLabelsMagic)
    throw format_error("idx: bad labels magic " + hex32(lmagic) + " in " + labels_path +
                       " (expected " + hex32(kLabelsMagic) + ")");
  const std::uint32_t lcount = read_be32(labels, lpos, labels_path);

  if (count != lcount)
    throw format_error("idx: image count " + std::to_string(count) + " != label count " +
                       std::to_string(lcount));
  if (count == 0) throw invalid_input_error("idx: empty dataset");

  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  if (ipos + static_cast<std::size_t>(count) * pixels > images.size())
    throw format_error("idx: truncated file " + images_path);
  if (lpos + count > labels.size()) throw format_error("idx: truncated file " + labels_path);

  IdxDataset out;
  out.rows = rows;
  out.cols = cols;
  out.samples.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Sample& s = out.samples[i];
    s.y = static_cast<std::uint8_t>(labels[lpos + i]);
    s.x.resize(pixels);
    for (std::size_t p = 0; p < pixels; ++p)
      s.x[p] = static_cast<std::uint8_t>(images[ipos + i * pixels + p]) / 255.0;
  }
  return out;
}

void write_idx(std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
               std::size_t rows, std::size_t cols, const std::string& images_path,
               const std::string& labels_path) {
  if (rows == 0 || cols == 0) throw invalid_input_error("idx: rows and cols must be >= 1");
  const std::size_t per = rows * cols;
  if (labels.empty() || pixels.size() != labels.size() * per)
    throw invalid_input_error("idx: pixel buffer does not match label count and image size");

  std::string iblob;
  write_be32(iblob, kImagesMagic);
  write_be32(iblob, static_cast<std::uint32_t>(labels.size()));
  write_be32(iblob, static_cast<std::uint32_t>(rows));
  write_be32(iblob, static_cast<std::uint32_t>(cols));
  iblob.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());

  std::string lblob;
  write_be32(lblob, kLabelsMagic);
  write_be32(lblob, static_cast<std::uint32_t>(labels.size()));
  lblob.append(reinterpret_cast<const char*>(labels.data()), labels.size());

  std::ofstream iout(images_path, std::ios::binary | std::ios::trunc);
  if (!iout) throw format_error("idx: cannot open " + images_path + " for writing");
  iout.write(iblob.data(), static_cast<std::streamsize>(iblob.size()));
  std::ofstream lout(labels_path, std::ios::binary | std::ios::trunc);
  if (!lout) throw format_error("idx: cannot open " + labels_path + " for writing");
  lout.write(lblob.data(), static_cast<std::streamsize>(lblob.size()));
}

std::vector<Sample> load_csv(const std::string& path, std::size_t k) {
  if (k == 0) throw invalid_input_error("csv: k must be >= 1");
  std::ifstream in(path);
  if (!in) throw format_error("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw format_error("csv: missing header row in " + path);

  std::vector<Sample> samples;
  std::size_t line_no = 1;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (cells.size() < 2)
      throw format_error("csv: line " + std::to_string(line_no) + " has fewer than 2 columns");
    if (columns == 0)
      columns = cells.size();
    else if (cells.size() != columns)
      throw format_error("csv: ragged row at line " + std::to_string(line_no) + " (" +
                         std::to_string(cells.size()) + " columns, expected " +
                         std::to_string(columns) + ")");
    Sample s;
    s.x.resize(columns - 1);
    for (std::size_t j = 0; j + 1 < columns; ++j) {
      try {
        std::size_t pos = 0;
        s.x[j] = std::stod(cells[j], &pos);
        if (pos != cells[j].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw format_error("csv: non-numeric cell '" + cells[j] + "' at line " +
                           std::to_string(line_no));
      }
    }
    const std::string& label_cell = cells.back();
    long long label = -1;
    try {
      std::size_t pos = 0;
      label = std::stoll(label_cell, &pos);
      if (pos != label_cell.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw format_error("csv: non-integer label '" + label_cell + "' at line " +
                         std::to_string(line_no));
    }
    if (label < 0 || label >= static_cast<long long>(k))
      throw format_error("csv: label " + std::to_string(label) + " out of range [0," +
                         std::to_string(k) + ") at line " + std::to_string(line_no));
    s.y = static_cast<std::size_t>(label);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw invalid_input_error("csv: no data rows in " + path);
  return samples;
}

void write_csv(std::span<const Sample> samples, const std::string& path) {
  if (samples.empty()) throw invalid_input_error("csv: nothing to write");
  const std::size_t d = samples.front().x.size();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw format_error("csv: cannot open " + path + " for writing");
  for (std::size_t j = 0; j < d; ++j) out << "f" << j << ",";
  out << "label\n";
  char buf[40];
  for (const Sample& s : samples) {
    if (s.x.size() != d) throw invalid_input_error("csv: inconsistent feature count");
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.x[j]);
      out << buf << ",";
    }
    out << s.y << "\n";
  }
  if (!out) throw format_error("csv: write failed for " + path);
}

}  // namespace lsbound
