#include "work_dir_lock.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <string>

#include "arggen/error.hpp"

namespace arggen::cli {

WorkDirLock::WorkDirLock(const std::filesystem::path& work_dir) : path_(work_dir / ".arggen.lock") {
  std::filesystem::create_directories(work_dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      std::string owner;
      std::ifstream(path_) >> owner;
      throw Error(ErrorCode::LockHeld, "work dir " + work_dir.string() + " is locked by process " +
                                           (owner.empty() ? std::string("?") : owner) + " (" + path_.string() + ")");
    }
    throw Error(ErrorCode::IoError, "cannot create " + path_.string() + ": " + std::strerror(errno));
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkDirLock::~WorkDirLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

}  // namespace arggen::cli
