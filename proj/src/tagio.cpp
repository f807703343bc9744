#include "demuxsim/tagio.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace demuxsim {

namespace {

constexpr char kMagic[4] = {'T', 'T', 'A', 'G'};

void put_u16(unsigned char* p, uint16_t v) {
    p[0] = static_cast<unsigned char>(v);
    p[1] = static_cast<unsigned char>(v >> 8);
}

void put_u32(unsigned char* p, uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* p, uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

uint16_t get_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

void TagFileHeader::validate() const {
    if (version != 1) throw FormatError("unsupported tag file version");
    if (tick_ps < 1) throw FormatError("tick_ps must be >= 1");
    if (channel_count < 1) throw FormatError("channel_count must be >= 1");
}

uint64_t write_tags(const TagFileHeader& header, const std::vector<TagRecord>& records,
                    std::ostream& out) {
    header.validate();

    // refuse out-of-order input up front
    std::vector<uint64_t> last_tick(header.channel_count, 0);
    std::vector<bool> seen(header.channel_count, false);
    uint64_t last_global = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        const TagRecord& r = records[i];
        if (r.channel >= header.channel_count)
            throw OrderingError("record channel out of range at index " + std::to_string(i), i);
        if (i > 0 && r.ticks < last_global)
            throw OrderingError("global tick order violated at index " + std::to_string(i), i);
        if (seen[r.channel] && r.ticks <= last_tick[r.channel])
            throw OrderingError("per-channel ticks not strictly increasing at index " +
                                    std::to_string(i),
                                i);
        last_global = r.ticks;
        last_tick[r.channel] = r.ticks;
        seen[r.channel] = true;
    }

    unsigned char buf[kTagHeaderBytes] = {0};
    std::memcpy(buf, kMagic, 4);
    put_u16(buf + 4, header.version);
    put_u32(buf + 6, header.tick_ps);
    put_u16(buf + 10, header.channel_count);
    out.write(reinterpret_cast<const char*>(buf), kTagHeaderBytes);

    unsigned char rec[kTagRecordBytes];
    for (const TagRecord& r : records) {
        std::memset(rec, 0, sizeof rec);
        put_u64(rec, r.ticks);
        rec[8] = r.channel;
        rec[9] = r.flags;
        out.write(reinterpret_cast<const char*>(rec), kTagRecordBytes);
    }
    if (!out) throw TagIoError("write failed");
    return kTagHeaderBytes + kTagRecordBytes * static_cast<uint64_t>(records.size());
}

TagReader::TagReader(std::istream& in) : in_(in) {
    unsigned char buf[kTagHeaderBytes];
    in_.read(reinterpret_cast<char*>(buf), kTagHeaderBytes);
    if (in_.gcount() != static_cast<std::streamsize>(kTagHeaderBytes))
        throw FormatError("tag stream shorter than a header");
    if (std::memcmp(buf, kMagic, 4) != 0) throw FormatError("bad magic, not a TTAG stream");
    header_.version = get_u16(buf + 4);
    header_.tick_ps = get_u32(buf + 6);
    header_.channel_count = get_u16(buf + 10);
    header_.validate();
    last_tick_.assign(header_.channel_count, 0);
    seen_.assign(header_.channel_count, false);
}

bool TagReader::next(TagRecord& out) {
    unsigned char rec[kTagRecordBytes];
    in_.read(reinterpret_cast<char*>(rec), kTagRecordBytes);
    std::streamsize got = in_.gcount();
    if (got == 0) return false;
    if (got != static_cast<std::streamsize>(kTagRecordBytes))
        throw TruncationError("truncated record at octet offset " + std::to_string(offset_),
                              offset_);

    out.ticks = get_u64(rec);
    out.channel = rec[8];
    out.flags = rec[9];

    if (out.channel >= header_.channel_count)
        throw CorruptionError("record " + std::to_string(index_) + " channel out of range",
                              index_);
    if (any_ && out.ticks < last_global_)
        throw CorruptionError("record " + std::to_string(index_) + " breaks global tick order",
                              index_);
    if (seen_[out.channel] && out.ticks <= last_tick_[out.channel])
        throw CorruptionError("record " + std::to_string(index_) +
                                  " regresses on channel " + std::to_string(out.channel),
                              index_);
    last_global_ = out.ticks;
    any_ = true;
    last_tick_[out.channel] = out.ticks;
    seen_[out.channel] = true;
    offset_ += kTagRecordBytes;
    ++index_;
    return true;
}

std::vector<TagRecord> read_all_tags(std::istream& in, TagFileHeader* header) {
    TagReader reader(in);
    if (header) *header = reader.header();
    std::vector<TagRecord> out;
    TagRecord r;
    while (reader.next(r)) out.push_back(r);
    return out;
}

uint64_t export_csv(const std::vector<TagRecord>& records, std::ostream& out) {
    uint64_t octets = 0;
    auto emit = [&](const std::string& s) {
        out << s;
        octets += s.size();
    };
    emit("ticks,channel,flags\n");
    for (const TagRecord& r : records) {
        emit(std::to_string(r.ticks) + "," + std::to_string(r.channel) + "," +
             std::to_string(r.flags) + "\n");
    }
    if (!out) throw TagIoError("CSV write failed");
    return octets;
}

namespace {

bool parse_u64_field(const std::string& s, uint64_t& out) {
    if (s.empty()) return false;
    uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        uint64_t d = static_cast<uint64_t>(c - '0');
        if (v > (UINT64_MAX - d) / 10) return false;
        v = v * 10 + d;
    }
    out = v;
    return true;
}

}  // namespace

std::vector<TagRecord> import_csv(std::istream& in) {
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) throw CsvParseError("empty tag CSV", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "ticks,channel,flags")
        throw CsvParseError("tag CSV must start with 'ticks,channel,flags'", line_no);

    std::vector<TagRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t c1 = line.find(',');
        size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw CsvParseError("expected 3 fields at line " + std::to_string(line_no), line_no);
        uint64_t ticks = 0, channel = 0, flags = 0;
        if (!parse_u64_field(line.substr(0, c1), ticks) ||
            !parse_u64_field(line.substr(c1 + 1, c2 - c1 - 1), channel) ||
            !parse_u64_field(line.substr(c2 + 1), flags) || channel > 0xFF || flags > 0xFF)
            throw CsvParseError("non-integer field at line " + std::to_string(line_no), line_no);
        out.push_back({ticks, static_cast<uint8_t>(channel), static_cast<uint8_t>(flags)});
    }
    return out;
}

uint64_t write_tag_file(const std::string& path, const TagFileHeader& header,
                        const std::vector<TagRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TagIoError("cannot open " + path + " for writing");
    return write_tags(header, records, out);
}

std::vector<TagRecord> read_tag_file(const std::string& path, TagFileHeader* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TagIoError("cannot open " + path);
    return read_all_tags(in, header);
}

}  // namespace demuxsim
