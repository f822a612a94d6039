#include "sketchcv/cli.hpp"

int main(int argc, char** argv) { return sketchcv::run_cli(argc, argv); }
