#include "mdpdsf/cli_io.hpp"

int main(int argc, char** argv) { return mdpdsf::cli_main(argc, argv); }
