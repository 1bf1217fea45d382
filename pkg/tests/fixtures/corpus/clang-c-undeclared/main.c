#include <stdio.h>

int main(void) {
    printf("%d\n", counter);
    return 0;
}
