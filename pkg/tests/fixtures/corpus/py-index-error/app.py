def last(items):
    return items[5]

print(last([1, 2]))
