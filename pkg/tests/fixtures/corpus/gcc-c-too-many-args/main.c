void greet(void);

int main(void) {
    greet(42);
    return 0;
}

void greet(void) {}
