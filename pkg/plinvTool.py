import src

if __name__ == '__main__':
    src.main()
