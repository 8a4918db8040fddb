#include "mementomap/io.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mementomap/error.hpp"

namespace mementomap {

namespace {

[[noreturn]] void io_error(ErrorKind kind, const std::string& what) {
  throw Error(kind, what + ": " + std::strerror(errno));
}

}  // namespace

void StringSink::truncate_to(std::uint64_t pos) {
  if (pos > data_.size()) throw Error(ErrorKind::SinkFailure, "truncate beyond end");
  data_.resize(static_cast<std::size_t>(pos));
}

void NullSink::truncate_to(std::uint64_t pos) {
  if (pos > size_) throw Error(ErrorKind::SinkFailure, "truncate beyond end");
  size_ = pos;
}

FileSink::FileSink(const std::filesystem::path& path, std::size_t buffer_bytes)
    : path_(path), capacity_(std::max<std::size_t>(buffer_bytes, 4096)) {
  if (path.string() == "-") {
    throw Error(ErrorKind::SinkNotSeekable, "compaction output must be a regular file, not stdout");
  }
  struct stat st {};
  if (::stat(path.c_str(), &st) == 0 && !S_ISREG(st.st_mode)) {
    throw Error(ErrorKind::SinkNotSeekable, "output is not a regular file: " + path.string());
  }
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd_ < 0) io_error(ErrorKind::SinkFailure, "cannot open " + path.string());
  buffer_.reserve(capacity_);
}

FileSink::~FileSink() {
  if (fd_ >= 0) {
    try {
      drain();
    } catch (...) {
    }
    ::close(fd_);
  }
}

void FileSink::drain() {
  std::size_t off = 0;
  while (off < buffer_.size()) {
    const auto n = ::pwrite(fd_, buffer_.data() + off, buffer_.size() - off,
                            static_cast<off_t>(flushed_ + off));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error(ErrorKind::SinkFailure, "write to " + path_.string());
    }
    off += static_cast<std::size_t>(n);
  }
  flushed_ += buffer_.size();
  buffer_.clear();
}

void FileSink::write(std::string_view bytes) {
  if (buffer_.size() + bytes.size() > capacity_) drain();
  if (bytes.size() >= capacity_) {
    buffer_.assign(bytes);
    drain();
    return;
  }
  buffer_.append(bytes);
}

void FileSink::flush() { drain(); }

void FileSink::truncate_to(std::uint64_t pos) {
  if (pos > tell()) throw Error(ErrorKind::SinkFailure, "truncate beyond end");
  if (pos >= flushed_) {
    buffer_.resize(static_cast<std::size_t>(pos - flushed_));
    return;
  }
  buffer_.clear();
  if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) {
    io_error(ErrorKind::SinkFailure, "ftruncate " + path_.string());
  }
  flushed_ = pos;
}

void StreamSink::write(std::string_view bytes) {
  if (std::fwrite(bytes.data(), 1, bytes.size(), stream_) != bytes.size()) {
    io_error(ErrorKind::SinkFailure, "stream write");
  }
}

void StreamSink::flush() {
  if (std::fflush(stream_) != 0) io_error(ErrorKind::SinkFailure, "stream flush");
}

GzipFileSink::GzipFileSink(const std::filesystem::path& path) {
  gz_ = gzopen(path.c_str(), "wb6");
  if (!gz_) io_error(ErrorKind::SinkFailure, "cannot open " + path.string());
}

GzipFileSink::~GzipFileSink() {
  try {
    close();
  } catch (...) {
  }
}

void GzipFileSink::write(std::string_view bytes) {
  if (bytes.empty()) return;
  if (!gz_) throw Error(ErrorKind::SinkFailure, "write after close");
  const int n = gzwrite(static_cast<gzFile>(gz_), bytes.data(), static_cast<unsigned>(bytes.size()));
  if (n != static_cast<int>(bytes.size())) throw Error(ErrorKind::SinkFailure, "gzip write failed");
}

void GzipFileSink::flush() {
  if (gz_) gzflush(static_cast<gzFile>(gz_), Z_SYNC_FLUSH);
}

void GzipFileSink::close() {
  if (!gz_) return;
  const int rc = gzclose(static_cast<gzFile>(gz_));
  gz_ = nullptr;
  if (rc != Z_OK) throw Error(ErrorKind::SinkFailure, "gzip close failed");
}

std::unique_ptr<ByteSink> open_output(const std::string& path) {
  if (path == "-") return std::make_unique<StreamSink>(stdout);
  if (path.size() > 3 && path.ends_with(".gz")) return std::make_unique<GzipFileSink>(path);
  return std::make_unique<FileSink>(path);
}

std::size_t MemorySource::read_at(std::uint64_t offset, std::span<char> out) const {
  if (offset >= data_.size()) return 0;
  const auto n = std::min<std::size_t>(out.size(), data_.size() - offset);
  std::memcpy(out.data(), data_.data() + offset, n);
  return n;
}

bool has_gzip_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  return in.gcount() == 2 && magic[0] == 0x1f && magic[1] == 0x8b;
}

FileSource::FileSource(const std::filesystem::path& path) {
  fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd_ < 0) io_error(ErrorKind::IoFailure, "cannot open " + path.string());
  struct stat st {};
  if (::fstat(fd_, &st) != 0 || !S_ISREG(st.st_mode)) {
    ::close(fd_);
    throw Error(ErrorKind::IoFailure, "not a regular file: " + path.string());
  }
  size_ = static_cast<std::uint64_t>(st.st_size);
  unsigned char magic[2] = {0, 0};
  if (size_ >= 2 && ::pread(fd_, magic, 2, 0) == 2 && magic[0] == 0x1f && magic[1] == 0x8b) {
    ::close(fd_);
    throw Error(ErrorKind::GzipNotSeekable,
                "gzip input cannot be binary searched; decompress it first: " + path.string());
  }
}

FileSource::~FileSource() {
  if (fd_ >= 0) ::close(fd_);
}

std::size_t FileSource::read_at(std::uint64_t offset, std::span<char> out) const {
  std::size_t done = 0;
  while (done < out.size() && offset + done < size_) {
    const auto n = ::pread(fd_, out.data() + done, out.size() - done,
                           static_cast<off_t>(offset + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error(ErrorKind::IoFailure, "pread");
    }
    if (n == 0) break;
    done += static_cast<std::size_t>(n);
  }
  return done;
}

bool StringLineSource::next(std::string_view& line) {
  if (pos_ >= text_.size()) return false;
  auto nl = text_.find('\n', pos_);
  if (nl == std::string::npos) nl = text_.size();
  line = std::string_view(text_).substr(pos_, nl - pos_);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  pos_ = nl + 1;
  ++line_no_;
  return true;
}

FileLineSource::FileLineSource(const std::string& path) : path_(path) {
  if (path == "-") {
    gz_ = gzdopen(::dup(STDIN_FILENO), "rb");
  } else {
    gz_ = gzopen(path.c_str(), "rb");
  }
  if (!gz_) io_error(ErrorKind::IoFailure, "cannot open " + path);
  gzbuffer(static_cast<gzFile>(gz_), 1 << 17);
}

FileLineSource::~FileLineSource() {
  if (gz_) gzclose(static_cast<gzFile>(gz_));
}

bool FileLineSource::fill() {
  if (eof_) return false;
  if (begin_ > 0) {
    buffer_.erase(0, begin_);
    begin_ = 0;
  }
  constexpr std::size_t kChunk = 1 << 16;
  const auto old = buffer_.size();
  buffer_.resize(old + kChunk);
  const int n = gzread(static_cast<gzFile>(gz_), buffer_.data() + old, kChunk);
  if (n < 0) {
    int errnum = 0;
    const char* msg = gzerror(static_cast<gzFile>(gz_), &errnum);
    throw Error(ErrorKind::IoFailure, "read " + path_ + ": " + (msg ? msg : "?"));
  }
  buffer_.resize(old + static_cast<std::size_t>(n));
  if (n == 0) eof_ = true;
  return n > 0;
}

bool FileLineSource::next(std::string_view& line) {
  std::size_t scan = begin_;
  while (true) {
    const auto nl = buffer_.find('\n', scan);
    if (nl != std::string::npos) {
      line = std::string_view(buffer_).substr(begin_, nl - begin_);
      begin_ = nl + 1;
      break;
    }
    scan = buffer_.size() - begin_;
    if (!fill()) {
      if (begin_ >= buffer_.size()) return false;
      line = std::string_view(buffer_).substr(begin_);
      begin_ = buffer_.size();
      break;
    }
    scan += begin_;
  }
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  ++line_no_;
  return true;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mementomap
