// toy_target: minimal external fuzz target for exec-path tests.
//
// Reads the input from argv[1] when given, otherwise stdin. Writes one
// showmap line per distinct byte value class to the file named by
// GREENFUZZ_TRACE_FILE. Inputs starting with "CRASH" abort; inputs
// starting with "SLEEP" hang for two seconds.

#include <unistd.h>

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

int main(int argc, char** argv) {
  std::vector<unsigned char> input;
  if (argc > 1) {
    std::FILE* f = std::fopen(argv[1], "rb");
    if (!f) return 3;
    unsigned char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0)
      input.insert(input.end(), buf, buf + n);
    std::fclose(f);
  } else {
    unsigned char buf[4096];
    ssize_t n;
    while ((n = read(STDIN_FILENO, buf, sizeof(buf))) > 0)
      input.insert(input.end(), buf, buf + n);
  }

  if (input.size() >= 5 && std::memcmp(input.data(), "CRASH", 5) == 0)
    std::raise(SIGSEGV);
  if (input.size() >= 5 && std::memcmp(input.data(), "SLEEP", 5) == 0)
    ::sleep(2);

  std::uint32_t counts[32] = {0};
  for (unsigned char b : input) ++counts[b % 32];

  if (const char* trace_path = std::getenv("GREENFUZZ_TRACE_FILE")) {
    std::FILE* out = std::fopen(trace_path, "w");
    if (!out) return 4;
    std::fprintf(out, "1:1\n");  // entry edge
    for (int i = 0; i < 32; ++i)
      if (counts[i]) std::fprintf(out, "%d:%u\n", 8 + i, counts[i]);
    std::fclose(out);
  }
  return 0;
}
