#include "opdyn/cli.hpp"

int main(int argc, char** argv) { return opdyn::run_command(argc, argv); }
