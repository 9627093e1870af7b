#include "porenet/volume.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "porenet/errors.hpp"
#include "porenet/text_format.hpp"

namespace fs = std::filesystem;

namespace porenet {

Volume::Volume(Dims dims, std::uint8_t fill) : dims_(dims), data_(dims.count(), fill) {
    if (dims.z < 1 || dims.y < 1 || dims.x < 1) {
        throw Error(errc::invalid_data, "volume dims must all be >= 1");
    }
}

namespace {

// Skips PNM whitespace and '#' comment lines, then reads one unsigned token.
int read_pnm_int(std::istream& in, const std::string& path) {
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = in.get();
    }
    if (ch == EOF || !std::isdigit(ch)) {
        throw Error(errc::format_error, "bad PGM header in " + path);
    }
    long value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        if (value > 1'000'000'000L) throw Error(errc::format_error, "PGM header overflow in " + path);
        ch = in.get();
    }
    if (ch != EOF) in.unget();
    return static_cast<int>(value);
}

struct PgmSlice {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

PgmSlice read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::format_error, "cannot open " + path);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5') {
        throw Error(errc::format_error, "not a binary PGM (P5): " + path);
    }
    PgmSlice slice;
    slice.width = read_pnm_int(in, path);
    slice.height = read_pnm_int(in, path);
    int maxval = read_pnm_int(in, path);
    if (slice.width < 1 || slice.height < 1) {
        throw Error(errc::format_error, "degenerate PGM dimensions in " + path);
    }
    if (maxval > 255) {
        // 16-bit data would need rescaling and would change threshold
        // semantics; refuse it instead.
        throw Error(errc::format_error, "16-bit PGM rejected (maxval " + fmt_i64(maxval) + "): " + path);
    }
    if (maxval < 1) throw Error(errc::format_error, "bad PGM maxval in " + path);
    in.get();  // single whitespace byte separating header from raster
    slice.pixels.resize(static_cast<std::size_t>(slice.width) * slice.height);
    in.read(reinterpret_cast<char*>(slice.pixels.data()),
            static_cast<std::streamsize>(slice.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(slice.pixels.size())) {
        throw Error(errc::format_error, "truncated PGM raster: " + path);
    }
    return slice;
}

std::vector<fs::path> sorted_files_with_extension(const std::string& directory, const std::string& ext) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(directory, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            files.push_back(entry.path());
        }
    }
    if (ec) throw Error(errc::io_error, "cannot list " + directory + ": " + ec.message());
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    return files;
}

Volume load_pgm_stack_dir(const std::string& directory) {
    auto files = sorted_files_with_extension(directory, ".pgm");
    if (files.empty()) throw Error(errc::no_slices, "no .pgm slices in " + directory);

    PgmSlice first = read_pgm(files[0].string());
    Dims dims{static_cast<int>(files.size()), first.height, first.width};
    Volume volume(dims);
    std::copy(first.pixels.begin(), first.pixels.end(), volume.data().begin());
    for (std::size_t z = 1; z < files.size(); ++z) {
        PgmSlice slice = read_pgm(files[z].string());
        if (slice.width != first.width || slice.height != first.height) {
            throw Error(errc::inconsistent_stack,
                        "slice dimensions differ: " + files[z].filename().string());
        }
        std::copy(slice.pixels.begin(), slice.pixels.end(),
                  volume.data().begin() + static_cast<std::ptrdiff_t>(z * slice.pixels.size()));
    }
    return volume;
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::format_error, "cannot open manifest " + path);
    std::map<std::string, std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        std::size_t colon = text.find(':');
        if (colon == std::string::npos) {
            throw Error(errc::format_error, "manifest line without ':' in " + path);
        }
        entries[trim(text.substr(0, colon))] = trim(text.substr(colon + 1));
    }
    return entries;
}

std::string raw_path_for_manifest(const std::string& manifest_path) {
    fs::path p(manifest_path);
    p.replace_extension(".raw");
    return p.string();
}

}  // namespace

Volume load_pgm_slice(const std::string& path) {
    PgmSlice slice = read_pgm(path);
    Volume volume(Dims{1, slice.height, slice.width});
    std::copy(slice.pixels.begin(), slice.pixels.end(), volume.data().begin());
    return volume;
}

std::string encode_pgm(const std::uint8_t* row_major, int width, int height) {
    std::string out = "P5\n" + fmt_i64(width) + " " + fmt_i64(height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(row_major),
               static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    return out;
}

void save_pgm_stack(const Volume& volume, const std::string& directory) {
    std::error_code ec;
    fs::create_directories(directory, ec);
    if (ec) throw Error(errc::io_error, "cannot create " + directory + ": " + ec.message());
    const Dims& d = volume.dims();
    const std::size_t slice_size = static_cast<std::size_t>(d.y) * d.x;
    for (int z = 0; z < d.z; ++z) {
        char name[32];
        std::snprintf(name, sizeof(name), "slice_%04d.pgm", z);
        std::string content = encode_pgm(volume.data().data() + z * slice_size, d.x, d.y);
        write_text_file((fs::path(directory) / name).string(), content);
    }
}

Volume load_raw(const std::string& manifest_path) {
    auto manifest = read_manifest(manifest_path);
    for (const char* key : {"z", "y", "x", "dtype"}) {
        if (!manifest.count(key)) {
            throw Error(errc::format_error, std::string("manifest missing key '") + key + "': " + manifest_path);
        }
    }
    if (manifest["dtype"] != "u8") {
        throw Error(errc::format_error, "unsupported dtype '" + manifest["dtype"] + "' (only u8): " + manifest_path);
    }
    Dims dims{static_cast<int>(parse_i64(manifest["z"])), static_cast<int>(parse_i64(manifest["y"])),
              static_cast<int>(parse_i64(manifest["x"]))};
    if (dims.z < 1 || dims.y < 1 || dims.x < 1) {
        throw Error(errc::format_error, "manifest dims must be >= 1: " + manifest_path);
    }
    std::string blob = read_text_file(raw_path_for_manifest(manifest_path));
    if (blob.size() != dims.count()) {
        throw Error(errc::format_error, "raw blob size " + fmt_u64(blob.size()) + " does not match dims in " +
                                            manifest_path);
    }
    Volume volume(dims);
    std::copy(blob.begin(), blob.end(), reinterpret_cast<char*>(volume.data().data()));
    return volume;
}

void save_raw(const Volume& volume, const std::string& manifest_path) {
    const Dims& d = volume.dims();
    std::string manifest = "z: " + fmt_i64(d.z) + "\ny: " + fmt_i64(d.y) + "\nx: " + fmt_i64(d.x) + "\ndtype: u8\n";
    write_text_file(manifest_path, manifest);
    std::string blob(reinterpret_cast<const char*>(volume.data().data()), volume.data().size());
    write_text_file(raw_path_for_manifest(manifest_path), blob);
}

Volume load_stack(const std::string& path, VolumeFormat hint) {
    if (hint == VolumeFormat::pgm_stack) return load_pgm_stack_dir(path);
    if (hint == VolumeFormat::raw_blob) {
        if (fs::is_directory(path)) {
            auto manifests = sorted_files_with_extension(path, ".manifest");
            if (manifests.size() != 1) {
                throw Error(errc::format_error, "expected exactly one .manifest in " + path);
            }
            return load_raw(manifests[0].string());
        }
        return load_raw(path);
    }
    // auto: a manifest path or a directory; directories prefer PGM slices.
    if (!fs::is_directory(path)) {
        if (fs::path(path).extension() == ".manifest") return load_raw(path);
        throw Error(errc::format_error, "cannot auto-detect volume format of " + path);
    }
    if (!sorted_files_with_extension(path, ".pgm").empty()) return load_pgm_stack_dir(path);
    auto manifests = sorted_files_with_extension(path, ".manifest");
    if (manifests.size() == 1) return load_raw(manifests[0].string());
    throw Error(errc::no_slices, "no .pgm slices or .manifest in " + path);
}

}  // namespace porenet
