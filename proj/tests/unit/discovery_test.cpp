#include "itest/discovery.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "support/test_support.hpp"

using namespace itest;
using itest::testing::TempDir;
using itest::testing::write_file;

namespace fs = std::filesystem;

namespace {

RunConfig config_for(std::vector<std::string> paths) {
  RunConfig c;
  c.paths = std::move(paths);
  return c;
}

std::vector<std::string> relative(const std::vector<std::string>& files, const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& f : files) out.push_back(fs::path(f).lexically_relative(root).generic_string());
  return out;
}

const CollectionError& error_of(const LoadResult& r) { return std::get<CollectionError>(r); }

}  // namespace

TEST(Discovery, DirectoriesAreSearchedRecursivelyForPythonFiles) {
  TempDir dir;
  write_file(dir / "a.py", "");
  write_file(dir / "pkg/b.py", "");
  write_file(dir / "pkg/deeper/c.py", "");
  write_file(dir / "pkg/notes.txt", "");
  write_file(dir / ".hidden/d.py", "");
  auto files = resolve_paths(config_for({dir.path().string()}));
  EXPECT_EQ(relative(files, dir.path()), (std::vector<std::string>{"a.py", "pkg/b.py", "pkg/deeper/c.py"}));
}

TEST(Discovery, ExplicitFilesAreKeptWhateverTheirExtension) {
  TempDir dir;
  write_file(dir / "script", "");
  auto files = resolve_paths(config_for({(dir / "script").string()}));
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(fs::path(files[0]).filename(), "script");
}

TEST(Discovery, OverlappingPathsYieldEachFileOnce) {
  TempDir dir;
  write_file(dir / "a.py", "");
  write_file(dir / "sub/b.py", "");
  auto files = resolve_paths(
      config_for({dir.path().string(), (dir / "sub").string(), (dir / "sub/b.py").string(), (dir / "a.py").string()}));
  EXPECT_EQ(relative(files, dir.path()), (std::vector<std::string>{"a.py", "sub/b.py"}));
}

TEST(Discovery, SymlinkCyclesTerminate) {
  TempDir dir;
  write_file(dir / "sub/a.py", "");
  fs::create_directory_symlink(dir.path(), dir / "sub/loop");
  auto files = resolve_paths(config_for({dir.path().string()}));
  EXPECT_EQ(relative(files, dir.path()), (std::vector<std::string>{"sub/a.py"}));
}

TEST(Discovery, NonexistentPathIsAUsageError) {
  TempDir dir;
  try {
    resolve_paths(config_for({(dir / "missing").string()}));
    FAIL() << "expected NonexistentPath";
  } catch (const NonexistentPath& e) {
    EXPECT_EQ(e.path(), (dir / "missing").string());
  }
}

TEST(Discovery, DisplayPathIsLexicallyNormal) {
  EXPECT_EQ(display_path("./a/./b/../c.py"), "a/c.py");
  EXPECT_EQ(display_path("a/"), "a");
  EXPECT_EQ(display_path("/x//y.py"), "/x/y.py");
}

TEST(Discovery, ByteOrderMarkAndCarriageReturnsAreAccepted) {
  LoadResult r = load_source_text("f.py", "\xEF\xBB\xBFx = 1\r\ny = 2\rz = 3\n");
  ASSERT_TRUE(std::holds_alternative<SourceFile>(r));
  const SourceFile& s = std::get<SourceFile>(r);
  EXPECT_EQ(s.text(), "x = 1\ny = 2\nz = 3\n");
  EXPECT_EQ(s.module().body.size(), 3u);
}

TEST(Discovery, InvalidUtf8IsADecodeError) {
  LoadResult r = load_source_text("f.py", "x = '\xff'\n");
  ASSERT_TRUE(std::holds_alternative<CollectionError>(r));
  EXPECT_EQ(error_of(r).reason, reason::kDecodeError);
  EXPECT_TRUE(error_of(r).fatal);
}

TEST(Discovery, SyntaxErrorCarriesItsLine) {
  LoadResult r = load_source_text("f.py", "x = 1\ny = (\n\nz = 2\ndef\n");
  ASSERT_TRUE(std::holds_alternative<CollectionError>(r));
  EXPECT_EQ(error_of(r).reason, reason::kSyntaxError);
  ASSERT_TRUE(error_of(r).line.has_value());
  EXPECT_GE(*error_of(r).line, 2);
}

TEST(Discovery, UnreadableFileIsAReadError) {
  LoadResult r = load_source("/nonexistent/definitely/missing.py");
  ASSERT_TRUE(std::holds_alternative<CollectionError>(r));
  EXPECT_EQ(error_of(r).reason, reason::kReadError);
}

TEST(Discovery, ParallelLoadingKeepsInputOrder) {
  TempDir dir;
  std::vector<std::string> paths;
  for (int i = 0; i < 40; ++i) {
    std::string p = (dir / ("m" + std::to_string(i) + ".py")).string();
    write_file(p, i % 7 == 3 ? "def (\n" : "v = " + std::to_string(i) + "\n");
    paths.push_back(p);
  }
  auto results = load_sources(paths, 4);
  ASSERT_EQ(results.size(), paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i % 7 == 3) {
      ASSERT_TRUE(std::holds_alternative<CollectionError>(results[i]));
      EXPECT_EQ(error_of(results[i]).path, paths[i]);
    } else {
      ASSERT_TRUE(std::holds_alternative<SourceFile>(results[i]));
      EXPECT_EQ(std::get<SourceFile>(results[i]).path(), paths[i]);
    }
  }
}
