#pragma once

#include <filesystem>

namespace arggen::cli {

// Exclusive per-work-dir lock held for the lifetime of one stage.
class WorkDirLock {
 public:
  explicit WorkDirLock(const std::filesystem::path& work_dir);
  ~WorkDirLock();

  WorkDirLock(const WorkDirLock&) = delete;
  WorkDirLock& operator=(const WorkDirLock&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace arggen::cli
