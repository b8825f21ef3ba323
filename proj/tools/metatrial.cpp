#include "metatrial/harness/cli.hpp"

int main(int argc, char** argv) { return metatrial::cli_main(argc, argv); }
