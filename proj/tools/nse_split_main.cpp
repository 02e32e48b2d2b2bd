#include "nsesplit/cli.hpp"

int main(int argc, char** argv) { return nsesplit::run_cli(argc, argv); }
