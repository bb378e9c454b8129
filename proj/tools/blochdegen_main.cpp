#include "blochdegen/cli.hpp"

int main(int argc, char** argv) { return blochdegen::run_command(argc, argv); }
