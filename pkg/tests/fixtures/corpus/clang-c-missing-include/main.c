#include <definitely_not_a_real_header.h>

int main(void) { return 0; }
