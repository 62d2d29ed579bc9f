#include "specgan/binio.hpp"

#include "specgan/common.hpp"

#include <fstream>
#include <system_error>

namespace specgan::binio {

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw DatasetIoError("cannot open for writing: " + tmp.string());
        }
        os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        os.flush();
        if (!os) {
            throw DatasetIoError("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DatasetIoError("cannot rename into place: " + path.string());
    }
}

}  // namespace specgan::binio
