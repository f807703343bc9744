#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace demuxsim {

// Binary time-tag stream: a 16-octet header followed by packed 12-octet
// records, all integers little-endian.
//
//   header: "TTAG" | u16 version | u32 tick_ps | u16 channel_count | 4 zero octets
//   record: u64 ticks | u8 channel | u8 flags | u16 zero
//
// Records are globally nondecreasing in ticks and strictly increasing per
// channel. Flag bit 0 marks a laser-trigger record.

struct TagFileHeader {
    uint16_t version = 1;
    uint32_t tick_ps = 81;
    uint16_t channel_count = 1;

    void validate() const;
};

struct TagRecord {
    uint64_t ticks = 0;
    uint8_t channel = 0;
    uint8_t flags = 0;

    bool operator==(const TagRecord&) const = default;
};

constexpr size_t kTagHeaderBytes = 16;
constexpr size_t kTagRecordBytes = 12;
constexpr uint8_t kFlagLaserTrigger = 0x01;

struct TagIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : TagIoError {
    using TagIoError::TagIoError;
};

struct TruncationError : TagIoError {
    uint64_t offset;  // octet offset of the truncated record
    TruncationError(const std::string& what, uint64_t offset_arg)
        : TagIoError(what), offset(offset_arg) {}
};

struct CorruptionError : TagIoError {
    uint64_t record_index;
    CorruptionError(const std::string& what, uint64_t index)
        : TagIoError(what), record_index(index) {}
};

struct OrderingError : TagIoError {
    size_t record_index;  // first offending record
    OrderingError(const std::string& what, size_t index)
        : TagIoError(what), record_index(index) {}
};

struct CsvParseError : TagIoError {
    size_t line;  // 1-based, counting the header line
    CsvParseError(const std::string& what, size_t line_arg)
        : TagIoError(what), line(line_arg) {}
};

// Writes header + records, returns the octet count (16 + 12 * records).
// Refuses to write records violating the ordering invariants.
uint64_t write_tags(const TagFileHeader& header, const std::vector<TagRecord>& records,
                    std::ostream& out);

// Streaming reader; memory use is independent of file size. Header
// validation happens in the constructor, record invariants while iterating.
class TagReader {
public:
    explicit TagReader(std::istream& in);

    const TagFileHeader& header() const { return header_; }

    // Next record, or false at a clean end of stream.
    bool next(TagRecord& out);

private:
    std::istream& in_;
    TagFileHeader header_;
    std::vector<uint64_t> last_tick_;  // per channel
    std::vector<bool> seen_;
    uint64_t last_global_ = 0;
    bool any_ = false;
    uint64_t offset_ = kTagHeaderBytes;
    uint64_t index_ = 0;
};

std::vector<TagRecord> read_all_tags(std::istream& in, TagFileHeader* header = nullptr);

// CSV interchange, header `ticks,channel,flags`. Returns octets written.
uint64_t export_csv(const std::vector<TagRecord>& records, std::ostream& out);
std::vector<TagRecord> import_csv(std::istream& in);

// Convenience path-based wrappers.
uint64_t write_tag_file(const std::string& path, const TagFileHeader& header,
                        const std::vector<TagRecord>& records);
std::vector<TagRecord> read_tag_file(const std::string& path, TagFileHeader* header = nullptr);

}  // namespace demuxsim
