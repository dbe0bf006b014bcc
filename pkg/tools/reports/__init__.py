"""Report writers for pedcross runs"""
