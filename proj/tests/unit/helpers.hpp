#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mission/corpus.hpp"
#include "mission/util.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mission-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline mission::Tweet tweet(const std::string& pid, const std::string& id, const std::string& text, std::int64_t ts,
                            bool rt = false) {
  mission::Tweet t;
  t.tweet_id = id;
  t.profile_id = pid;
  t.text_raw = text;
  t.text_norm = mission::normalize_tweet(text);
  t.timestamp = ts;
  t.is_retweet = rt;
  return t;
}

// Timeline of n distinct tweets spaced `gap` seconds apart.
inline mission::ProfileTimeline timeline(const std::string& pid, std::size_t n, std::int64_t gap = 3600) {
  mission::ProfileTimeline tl;
  tl.profile_id = pid;
  for (std::size_t i = 0; i < n; ++i)
    tl.tweets.push_back(tweet(pid, pid + "-" + std::to_string(i),
                              "tweet number " + std::to_string(i) + " about some topic words here for length",
                              1'600'000'000 + static_cast<std::int64_t>(i) * gap));
  return tl;
}

}  // namespace testing
