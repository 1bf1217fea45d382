#include <vector>

int main() {
    std::vector<int> values;
    values.push_backx(3);
    return 0;
}
