#include "remask/error.hpp"
#include "remask/experiment.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

namespace remask {

namespace fs = std::filesystem;

void write_file_atomic(const fs::path & path, const std::string & contents) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        require(!ec, Errc::io_error, "cannot create " + path.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), Errc::io_error, "cannot write " + tmp.string());
        out << contents;
        out.flush();
        require(out.good(), Errc::io_error, "write to " + tmp.string() + " failed");
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        fail(Errc::io_error, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string csv_header(const std::string & config_hash, std::uint64_t master_seed,
                       const std::vector<std::string> & extra) {
    std::ostringstream os;
    os << "# config_hash: " << config_hash << '\n';
    os << "# master_seed: " << master_seed << '\n';
    for (const auto & e : extra) os << "# " << e << '\n';
    return os.str();
}

} // namespace remask
