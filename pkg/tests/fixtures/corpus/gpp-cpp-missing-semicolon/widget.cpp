class Widget {
    int size;
}

int main() {
    Widget w;
    return 0;
}
