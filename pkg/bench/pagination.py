from rest_framework.pagination import PageNumberPagination

class DefaultPagination(PageNumberPagination):
    page_size = 10


class TracePagination(PageNumberPagination):
    """
    Traces run to thousands of rows; clients may ask for bigger pages.
    """
    page_size = 100
    page_size_query_param = 'page_size'
    max_page_size = 5000
