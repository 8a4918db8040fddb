#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace mementomap {

/// Append-only byte output.
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual void write(std::string_view bytes) = 0;
  virtual void flush() {}
};

/// Output that can discard everything written after a previous position.
/// The compactor needs this to replace an emitted sub-tree with a wildcard.
class SeekableSink : public ByteSink {
 public:
  virtual std::uint64_t tell() const = 0;
  /// `pos` must not exceed tell().
  virtual void truncate_to(std::uint64_t pos) = 0;
};

class StringSink final : public SeekableSink {
 public:
  void write(std::string_view bytes) override { data_.append(bytes); }
  std::uint64_t tell() const override { return data_.size(); }
  void truncate_to(std::uint64_t pos) override;

  const std::string& str() const noexcept { return data_; }
  std::string take() { return std::move(data_); }

 private:
  std::string data_;
};

/// Counts bytes and discards them.
class NullSink final : public SeekableSink {
 public:
  void write(std::string_view bytes) override { size_ += bytes.size(); }
  std::uint64_t tell() const override { return size_; }
  void truncate_to(std::uint64_t pos) override;

 private:
  std::uint64_t size_ = 0;
};

/// Buffered regular-file output. Truncating behind the buffer ftruncates.
class FileSink final : public SeekableSink {
 public:
  /// Throws SinkNotSeekable for FIFOs, character devices and "-".
  explicit FileSink(const std::filesystem::path& path, std::size_t buffer_bytes = 1 << 20);
  ~FileSink() override;
  FileSink(const FileSink&) = delete;
  FileSink& operator=(const FileSink&) = delete;

  void write(std::string_view bytes) override;
  void flush() override;
  std::uint64_t tell() const override { return flushed_ + buffer_.size(); }
  void truncate_to(std::uint64_t pos) override;

 private:
  void drain();

  int fd_ = -1;
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t capacity_;
  std::uint64_t flushed_ = 0;
};

/// Forward-only stdio output (stdout, pipes).
class StreamSink final : public ByteSink {
 public:
  explicit StreamSink(std::FILE* stream) : stream_(stream) {}
  void write(std::string_view bytes) override;
  void flush() override;

 private:
  std::FILE* stream_;
};

/// gzip-compressed file output.
class GzipFileSink final : public ByteSink {
 public:
  explicit GzipFileSink(const std::filesystem::path& path);
  ~GzipFileSink() override;
  GzipFileSink(const GzipFileSink&) = delete;
  GzipFileSink& operator=(const GzipFileSink&) = delete;

  void write(std::string_view bytes) override;
  void flush() override;
  void close();

 private:
  void* gz_ = nullptr;
};

/// "-" maps to stdout; a ".gz" suffix selects gzip output.
std::unique_ptr<ByteSink> open_output(const std::string& path);

/// Random-access input for binary search.
class ByteSource {
 public:
  virtual ~ByteSource() = default;
  virtual std::uint64_t size() const = 0;
  /// Reads up to out.size() bytes at `offset`; returns the count read.
  virtual std::size_t read_at(std::uint64_t offset, std::span<char> out) const = 0;
  /// Whole content when resident in memory.
  virtual std::optional<std::string_view> view() const { return std::nullopt; }
};

class MemorySource final : public ByteSource {
 public:
  explicit MemorySource(std::string data) : data_(std::move(data)) {}
  std::uint64_t size() const override { return data_.size(); }
  std::size_t read_at(std::uint64_t offset, std::span<char> out) const override;
  std::optional<std::string_view> view() const override { return data_; }
  const std::string& data() const noexcept { return data_; }

 private:
  std::string data_;
};

/// pread(2)-backed file source. Throws GzipNotSeekable on gzip input.
class FileSource final : public ByteSource {
 public:
  explicit FileSource(const std::filesystem::path& path);
  ~FileSource() override;
  FileSource(const FileSource&) = delete;
  FileSource& operator=(const FileSource&) = delete;

  std::uint64_t size() const override { return size_; }
  std::size_t read_at(std::uint64_t offset, std::span<char> out) const override;

 private:
  int fd_ = -1;
  std::uint64_t size_ = 0;
};

bool has_gzip_magic(const std::filesystem::path& path);

/// Sequential line input. Views stay valid until the next call to next().
/// Trailing "\r" is removed.
class LineSource {
 public:
  virtual ~LineSource() = default;
  virtual bool next(std::string_view& line) = 0;
  /// 1-based number of the line last returned.
  std::size_t line_number() const noexcept { return line_no_; }

 protected:
  std::size_t line_no_ = 0;
};

class StringLineSource final : public LineSource {
 public:
  explicit StringLineSource(std::string text) : text_(std::move(text)) {}
  bool next(std::string_view& line) override;

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

/// Reads plain or gzip files transparently; "-" reads stdin.
class FileLineSource final : public LineSource {
 public:
  explicit FileLineSource(const std::string& path);
  ~FileLineSource() override;
  FileLineSource(const FileLineSource&) = delete;
  FileLineSource& operator=(const FileLineSource&) = delete;

  bool next(std::string_view& line) override;

 private:
  bool fill();

  void* gz_ = nullptr;
  std::string path_;
  std::string buffer_;
  std::size_t begin_ = 0;
  bool eof_ = false;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace mementomap
